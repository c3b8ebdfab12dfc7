use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::WalkGnnError;

/// One trainable tensor plus its gradient and adaptive-moment buffers.
#[derive(Debug, Clone)]
pub struct Param {
    pub shape: Vec<usize>,
    pub value: Vec<f64>,
    pub grad: Vec<f64>,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Param {
    pub fn new(shape: Vec<usize>, value: Vec<f64>) -> Param {
        let len = value.len();
        assert_eq!(len, shape.iter().product::<usize>());
        Param {
            shape,
            value,
            grad: vec![0.0; len],
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }
}

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Flat registry of named parameter tensors. Iteration order is the name
/// order, so updates and serialization are deterministic.
#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    params: BTreeMap<String, Param>,
    step: u64,
}

impl ParamStore {
    pub fn new() -> ParamStore {
        ParamStore::default()
    }

    pub fn insert(&mut self, name: &str, param: Param) {
        let prev = self.params.insert(name.to_string(), param);
        assert!(prev.is_none(), "duplicate parameter name {name}");
    }

    pub fn get(&self, name: &str) -> &Param {
        &self.params[name]
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Param {
        self.params.get_mut(name).expect("unknown parameter")
    }

    pub fn contains(&self, name: &str) -> bool {
        self.params.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Param)> {
        self.params.iter()
    }

    pub fn num_params(&self) -> usize {
        self.params.values().map(|p| p.value.len()).sum()
    }

    pub fn zero_grad(&mut self) {
        for p in self.params.values_mut() {
            p.grad.iter_mut().for_each(|g| *g = 0.0);
        }
    }

    /// One Adam step over all parameters from their accumulated gradients.
    pub fn adam_step(&mut self, opt: &OptimizerConfig) {
        self.step += 1;
        let t = self.step as f64;
        let bc1 = 1.0 - opt.beta1.powf(t);
        let bc2 = 1.0 - opt.beta2.powf(t);
        for p in self.params.values_mut() {
            for i in 0..p.value.len() {
                let g = p.grad[i];
                p.m[i] = opt.beta1 * p.m[i] + (1.0 - opt.beta1) * g;
                p.v[i] = opt.beta2 * p.v[i] + (1.0 - opt.beta2) * g * g;
                let m_hat = p.m[i] / bc1;
                let v_hat = p.v[i] / bc2;
                p.value[i] -= opt.learning_rate * m_hat / (v_hat.sqrt() + opt.epsilon);
            }
        }
    }

    /// Serializes parameter names, shapes and raw little-endian values.
    pub fn write_params<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(&(self.params.len() as u64).to_le_bytes())?;
        for (name, p) in &self.params {
            w.write_all(&(name.len() as u32).to_le_bytes())?;
            w.write_all(name.as_bytes())?;
            w.write_all(&(p.shape.len() as u32).to_le_bytes())?;
            for &d in &p.shape {
                w.write_all(&(d as u64).to_le_bytes())?;
            }
            for &x in &p.value {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_params<R: Read>(r: &mut R) -> Result<ParamStore, WalkGnnError> {
        let count = read_u64(r)?;
        let mut store = ParamStore::new();
        for _ in 0..count {
            let name_len = read_u32(r)? as usize;
            let mut name_buf = vec![0u8; name_len];
            r.read_exact(&mut name_buf)?;
            let name = String::from_utf8(name_buf)
                .map_err(|_| WalkGnnError::Checkpoint("non-utf8 parameter name".into()))?;
            let ndims = read_u32(r)? as usize;
            let mut shape = Vec::with_capacity(ndims);
            for _ in 0..ndims {
                shape.push(read_u64(r)? as usize);
            }
            let len: usize = shape.iter().product();
            let mut value = Vec::with_capacity(len);
            for _ in 0..len {
                let mut buf = [0u8; 8];
                r.read_exact(&mut buf)?;
                value.push(f64::from_le_bytes(buf));
            }
            store.insert(&name, Param::new(shape, value));
        }
        Ok(store)
    }
}

pub(crate) fn read_u32<R: Read>(r: &mut R) -> Result<u32, WalkGnnError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

pub(crate) fn read_u64<R: Read>(r: &mut R) -> Result<u64, WalkGnnError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}
