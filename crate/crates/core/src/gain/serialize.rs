//! Binary model files.
//!
//! Layout (little-endian): magic `GAINMODL`, `u32` format version, the
//! training configuration as `key=value` text, feature names/kinds with
//! their normalization, both networks (per layer: dims, activation tag,
//! weights, bias as `f64`), then the loss history.

use std::io::{Read, Write};

use super::{Discriminator, GainError, GainModel, Generator, LossRecord, TrainConfig};
use crate::data::{FeatureKind, FeatureScale, NormalizationParams};
use crate::nn::{Activation, DenseLayer, Matrix, Mlp};

const MAGIC: &[u8; 8] = b"GAINMODL";
pub const FORMAT_VERSION: u32 = 1;

struct Writer<W: Write>(W);

impl<W: Write> Writer<W> {
    fn u8(&mut self, v: u8) -> std::io::Result<()> {
        self.0.write_all(&[v])
    }
    fn u32(&mut self, v: u32) -> std::io::Result<()> {
        self.0.write_all(&v.to_le_bytes())
    }
    fn u64(&mut self, v: u64) -> std::io::Result<()> {
        self.0.write_all(&v.to_le_bytes())
    }
    fn f64(&mut self, v: f64) -> std::io::Result<()> {
        self.0.write_all(&v.to_le_bytes())
    }
    fn str(&mut self, s: &str) -> std::io::Result<()> {
        self.u32(s.len() as u32)?;
        self.0.write_all(s.as_bytes())
    }
    fn mlp(&mut self, net: &Mlp) -> std::io::Result<()> {
        self.u32(net.layers().len() as u32)?;
        for l in net.layers() {
            self.u32(l.in_dim() as u32)?;
            self.u32(l.out_dim() as u32)?;
            self.u8(l.activation.tag())?;
            for &w in l.weights.as_slice() {
                self.f64(w)?;
            }
            for &b in &l.bias {
                self.f64(b)?;
            }
        }
        Ok(())
    }
}

struct Reader<R: Read>(R);

fn corrupt(msg: impl Into<String>) -> GainError {
    GainError::Format(msg.into())
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], GainError> {
        let mut buf = [0u8; N];
        self.0
            .read_exact(&mut buf)
            .map_err(|_| corrupt("unexpected end of file"))?;
        Ok(buf)
    }
    fn u8(&mut self) -> Result<u8, GainError> {
        Ok(self.bytes::<1>()?[0])
    }
    fn u32(&mut self) -> Result<u32, GainError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64, GainError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64, GainError> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn str(&mut self) -> Result<String, GainError> {
        let len = self.u32()? as usize;
        if len > 1 << 24 {
            return Err(corrupt("string length out of range"));
        }
        let mut buf = vec![0u8; len];
        self.0
            .read_exact(&mut buf)
            .map_err(|_| corrupt("unexpected end of file"))?;
        String::from_utf8(buf).map_err(|_| corrupt("invalid UTF-8"))
    }
    fn mlp(&mut self) -> Result<Mlp, GainError> {
        let n = self.u32()? as usize;
        if n == 0 || n > 64 {
            return Err(corrupt("layer count out of range"));
        }
        let mut layers = Vec::with_capacity(n);
        for _ in 0..n {
            let rows = self.u32()? as usize;
            let cols = self.u32()? as usize;
            if rows == 0 || cols == 0 || rows.saturating_mul(cols) > 1 << 26 {
                return Err(corrupt("layer dimensions out of range"));
            }
            let act = Activation::from_tag(self.u8()?).ok_or_else(|| corrupt("unknown activation"))?;
            let w = (0..rows * cols).map(|_| self.f64()).collect::<Result<Vec<_>, _>>()?;
            let b = (0..cols).map(|_| self.f64()).collect::<Result<Vec<_>, _>>()?;
            layers.push(DenseLayer::new(Matrix::new(rows, cols, w)?, b, act)?);
        }
        Ok(Mlp::new(layers)?)
    }
}

pub fn write_model<W: Write>(model: &GainModel, out: W) -> Result<(), GainError> {
    let mut w = Writer(out);
    w.0.write_all(MAGIC)?;
    w.u32(FORMAT_VERSION)?;
    w.str(&model.config.to_text())?;
    w.u32(model.d() as u32)?;
    for (c, name) in model.feature_names.iter().enumerate() {
        let s = model.normalization.scales[c];
        w.str(name)?;
        w.u8(match model.feature_kinds[c] {
            FeatureKind::Continuous => 0,
            FeatureKind::Binary => 1,
        })?;
        w.f64(s.min)?;
        w.f64(s.max)?;
        w.u8(u8::from(s.constant))?;
    }
    w.mlp(&model.generator.net)?;
    w.mlp(&model.discriminator.net)?;
    w.u64(model.history.len() as u64)?;
    for h in &model.history {
        w.f64(h.d_loss)?;
        w.f64(h.g_adv_loss)?;
        w.f64(h.g_recon_loss)?;
    }
    w.0.flush()?;
    Ok(())
}

pub fn read_model<R: Read>(input: R) -> Result<GainModel, GainError> {
    let mut r = Reader(input);
    if &r.bytes::<8>()? != MAGIC {
        return Err(corrupt("not a GAIN model file"));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(corrupt(format!("unsupported format version {version}")));
    }
    let config = TrainConfig::from_text(&r.str()?)?;
    let d = r.u32()? as usize;
    if d == 0 || d > 1 << 20 {
        return Err(corrupt("feature count out of range"));
    }
    let mut names = Vec::with_capacity(d);
    let mut kinds = Vec::with_capacity(d);
    let mut scales = Vec::with_capacity(d);
    for _ in 0..d {
        names.push(r.str()?);
        let kind = match r.u8()? {
            0 => FeatureKind::Continuous,
            1 => FeatureKind::Binary,
            _ => return Err(corrupt("unknown feature kind")),
        };
        kinds.push(kind);
        let min = r.f64()?;
        let max = r.f64()?;
        let constant = r.u8()? != 0;
        scales.push(FeatureScale {
            min,
            max,
            kind,
            constant,
        });
    }
    let generator = Generator::from_net(r.mlp()?)?;
    let discriminator = Discriminator::from_net(r.mlp()?)?;
    if generator.d() != d || discriminator.d() != d {
        return Err(corrupt("network width does not match feature count"));
    }
    let count = r.u64()? as usize;
    let mut history = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        history.push(LossRecord {
            d_loss: r.f64()?,
            g_adv_loss: r.f64()?,
            g_recon_loss: r.f64()?,
        });
    }
    Ok(GainModel {
        generator,
        discriminator,
        config,
        normalization: NormalizationParams { scales },
        feature_names: names,
        feature_kinds: kinds,
        history,
    })
}
