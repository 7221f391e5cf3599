//! Little-endian binary container for networks and optimizer state.
//!
//! ```text
//! file    := MAGIC(8) version:u32 payload
//! net     := activation:u32 n_sizes:u32 size:u64*n_sizes param:f64*
//! adam    := lr:f64 beta1:f64 beta2:f64 eps:f64 step:u64 first:f64* second:f64*
//! ```
//! Parameters are written layer by layer: weights (row-major, `inputs x outputs`)
//! then bias.

use std::path::Path;

use super::adam::{AdamConfig, OptimizerState};
use super::net::{Activation, AgentNet, Dense};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"CFLOCBIN";
pub const VERSION: u32 = 1;

#[derive(Debug, Default)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    /// Starts a buffer with the magic and version header.
    pub fn new() -> Self {
        let mut e = Encoder { buf: Vec::new() };
        e.buf.extend_from_slice(MAGIC);
        e.u32(VERSION);
        e
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn bytes(&mut self, v: &[u8]) {
        self.u64(v.len() as u64);
        self.buf.extend_from_slice(v);
    }

    fn layers(&mut self, layers: &[Dense]) {
        for d in layers {
            for s in d.slices() {
                s.iter().for_each(|v| self.f64(*v));
            }
        }
    }

    pub fn net(&mut self, net: &AgentNet) {
        self.u32(net.output_activation().code());
        let sizes = net.layer_sizes();
        self.u32(sizes.len() as u32);
        sizes.iter().for_each(|s| self.u64(*s as u64));
        self.layers(net.layers());
    }

    pub fn optimizer(&mut self, opt: &OptimizerState) {
        let c = opt.config;
        for v in [c.learning_rate, c.beta1, c.beta2, c.epsilon] {
            self.f64(v);
        }
        self.u64(opt.step);
        self.layers(&opt.first);
        self.layers(&opt.second);
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub struct Decoder<'a> {
    buf: &'a [u8],
    origin: &'a Path,
}

impl<'a> Decoder<'a> {
    /// Checks the header and positions the cursor at the payload.
    pub fn new(buf: &'a [u8], origin: &'a Path) -> Result<Self> {
        let mut d = Decoder { buf, origin };
        let magic = d.take(8)?;
        if magic != MAGIC {
            return Err(d.malformed("bad magic"));
        }
        let version = d.u32()?;
        if version != VERSION {
            return Err(d.malformed(&format!("unsupported version {version}")));
        }
        Ok(d)
    }

    fn malformed(&self, reason: &str) -> Error {
        Error::Container {
            path: self.origin.to_path_buf(),
            reason: reason.to_string(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(self.malformed("truncated"));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub fn bytes(&mut self) -> Result<Vec<u8>> {
        let n = self.u64()? as usize;
        Ok(self.take(n)?.to_vec())
    }

    fn fill(&mut self, layers: &mut [Dense]) -> Result<()> {
        for d in layers {
            for s in d.slices_mut() {
                for v in s.iter_mut() {
                    *v = self.f64()?;
                }
            }
        }
        Ok(())
    }

    pub fn net(&mut self) -> Result<AgentNet> {
        let act = self.u32()?;
        let output = Activation::from_code(act).ok_or_else(|| self.malformed("unknown activation"))?;
        let n = self.u32()? as usize;
        if n < 2 {
            return Err(self.malformed("network needs at least two layer sizes"));
        }
        let sizes = (0..n)
            .map(|_| self.u64().map(|v| v as usize))
            .collect::<Result<Vec<_>>>()?;
        let mut net = AgentNet::zeros(&sizes, output);
        self.fill(net.layers_mut())?;
        Ok(net)
    }

    /// Reads optimizer state for a network with the given shape.
    pub fn optimizer(&mut self, net: &AgentNet) -> Result<OptimizerState> {
        let config = AdamConfig {
            learning_rate: self.f64()?,
            beta1: self.f64()?,
            beta2: self.f64()?,
            epsilon: self.f64()?,
        };
        let mut opt = OptimizerState::new(net, config);
        opt.step = self.u64()?;
        self.fill(&mut opt.first)?;
        self.fill(&mut opt.second)?;
        Ok(opt)
    }

    pub fn finish(self) -> Result<()> {
        if !self.buf.is_empty() {
            return Err(self.malformed("trailing bytes"));
        }
        Ok(())
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn save_net(path: &Path, net: &AgentNet) -> Result<()> {
    let mut e = Encoder::new();
    e.net(net);
    write_file(path, &e.finish())
}

pub fn load_net(path: &Path) -> Result<AgentNet> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut d = Decoder::new(&bytes, path)?;
    let net = d.net()?;
    d.finish()?;
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    #[test]
    fn net_and_optimizer_round_trip() {
        let mut rng = seeded_rng(11);
        let net = AgentNet::new(&[3, 7, 2], Activation::Tanh, &mut rng);
        let mut opt = OptimizerState::new(&net, AdamConfig::with_rate(3e-4));
        let mut trained = net.clone();
        let (g, _) = net.backward(&[0.1, 0.2, 0.3], &[1.0, -1.0]).unwrap();
        opt.step(&mut trained, &g).unwrap();

        let mut e = Encoder::new();
        e.net(&trained);
        e.optimizer(&opt);
        let bytes = e.finish();
        let origin = Path::new("mem");
        let mut d = Decoder::new(&bytes, origin).unwrap();
        let net2 = d.net().unwrap();
        let opt2 = d.optimizer(&net2).unwrap();
        d.finish().unwrap();
        assert_eq!(net2, trained);
        assert_eq!(opt2, opt);
    }

    #[test]
    fn rejects_bad_header_and_truncation() {
        let origin = Path::new("mem");
        assert!(Decoder::new(b"NOTMAGIC\x01\0\0\0", origin).is_err());
        let mut e = Encoder::new();
        e.net(&AgentNet::zeros(&[2, 2], Activation::Identity));
        let bytes = e.finish();
        let mut d = Decoder::new(&bytes[..bytes.len() - 3], origin).unwrap();
        assert!(d.net().is_err());
    }
}
