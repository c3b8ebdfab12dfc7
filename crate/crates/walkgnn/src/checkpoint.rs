use std::io::{Read, Write};
use std::path::Path;

use crate::model::{WalkGnnConfig, WalkGnnModel};
use crate::params::{read_u32, read_u64, ParamStore};
use crate::WalkGnnError;

const MAGIC: &[u8; 8] = b"EGOSCKPT";
const VERSION: u32 = 1;

pub fn save_checkpoint<W: Write>(model: &WalkGnnModel, w: &mut W) -> std::io::Result<()> {
    let cfg = &model.cfg;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for field in [
        cfg.layers as u32,
        cfg.hidden as u32,
        cfg.mlp_depth as u32,
        cfg.mlp_hidden as u32,
        cfg.num_types as u32,
    ] {
        w.write_all(&field.to_le_bytes())?;
    }
    let flags = cfg.directed_concat as u8
        | (cfg.residual as u8) << 1
        | (cfg.use_node_features as u8) << 2
        | (cfg.use_edge_attrs as u8) << 3;
    w.write_all(&[flags])?;
    w.write_all(&cfg.seed.to_le_bytes())?;
    model.params.write_params(w)
}

pub fn load_checkpoint<R: Read>(r: &mut R) -> Result<WalkGnnModel, WalkGnnError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(WalkGnnError::Checkpoint("bad magic".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(WalkGnnError::Checkpoint(format!(
            "unsupported version {version}"
        )));
    }
    let layers = read_u32(r)? as usize;
    let hidden = read_u32(r)? as usize;
    let mlp_depth = read_u32(r)? as usize;
    let mlp_hidden = read_u32(r)? as usize;
    let num_types = read_u32(r)? as usize;
    let mut flags = [0u8; 1];
    r.read_exact(&mut flags)?;
    let seed = read_u64(r)?;
    let cfg = WalkGnnConfig {
        layers,
        hidden,
        mlp_depth,
        mlp_hidden,
        directed_concat: flags[0] & 1 != 0,
        residual: flags[0] & 2 != 0,
        use_node_features: flags[0] & 4 != 0,
        use_edge_attrs: flags[0] & 8 != 0,
        num_types,
        seed,
    };
    let params = ParamStore::read_params(r)?;
    Ok(WalkGnnModel::from_parts(cfg, params))
}

pub fn save_checkpoint_file(model: &WalkGnnModel, path: &Path) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    save_checkpoint(model, &mut w)
}

pub fn load_checkpoint_file(path: &Path) -> Result<WalkGnnModel, WalkGnnError> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    load_checkpoint(&mut r)
}
