use crate::sid::{Sid, REGISTER_COUNT, SID_BASE};

/// Byte-addressed 64 KB address space seen by `POKE` and `PEEK`.
pub trait MemoryBus {
    fn poke(&mut self, address: u16, value: u8);
    fn peek(&self, address: u16) -> u8;
}

/// Plain RAM with the chip mapped at 54272..=54300.
#[derive(Debug, Clone)]
pub struct C64Bus {
    ram: Box<[u8]>,
    pub sid: Sid,
}

impl C64Bus {
    pub fn new(sid: Sid) -> Self {
        Self { ram: vec![0u8; 0x1_0000].into_boxed_slice(), sid }
    }

    fn sid_offset(address: u16) -> Option<usize> {
        let offset = usize::from(address.checked_sub(SID_BASE)?);
        (offset < REGISTER_COUNT).then_some(offset)
    }
}

impl MemoryBus for C64Bus {
    fn poke(&mut self, address: u16, value: u8) {
        match Self::sid_offset(address) {
            Some(offset) => self.sid.poke(offset, value).expect("offset checked"),
            None => self.ram[usize::from(address)] = value,
        }
    }

    fn peek(&self, address: u16) -> u8 {
        match Self::sid_offset(address) {
            Some(offset) => self.sid.peek(offset).expect("offset checked"),
            None => self.ram[usize::from(address)],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sid::SidConfig;

    #[test]
    fn routes_chip_window() {
        let mut bus = C64Bus::new(Sid::new(SidConfig::default()).unwrap());
        bus.poke(54296, 15);
        assert_eq!(bus.sid.filter().master_volume_nibble, 15);
        assert_eq!(bus.peek(54296), 15);
        bus.poke(54301, 7);
        assert_eq!(bus.peek(54301), 7);
        assert_eq!(bus.sid.peek(24).unwrap(), 15);
        bus.poke(0, 1);
        bus.poke(65535, 2);
        assert_eq!((bus.peek(0), bus.peek(65535)), (1, 2));
    }
}
