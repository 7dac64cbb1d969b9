//! MPS checkpoint format: a small binary container with shape headers and a
//! trailing SHA-256 checksum; round-trips bit-exact.

use ndarray::Array3;
use num_complex::Complex64 as C64;
use sha2::{Digest, Sha256};

use super::mps::MatrixProductState;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"HLSIMPS1";

pub fn save_mps(state: &MatrixProductState) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(state.site_count() as u64).to_le_bytes());
    buf.extend_from_slice(&state.truncation_error.to_le_bytes());
    for i in 0..state.site_count() {
        let t = state.tensor(i);
        for d in t.shape() {
            buf.extend_from_slice(&(*d as u64).to_le_bytes());
        }
        for z in t.iter() {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);
    buf
}

pub fn load_mps(bytes: &[u8]) -> Result<MatrixProductState> {
    if bytes.len() < MAGIC.len() + 8 + 8 + 32 {
        return Err(Error::Validation("checkpoint too short".into()));
    }
    let (body, checksum) = bytes.split_at(bytes.len() - 32);
    let digest = Sha256::digest(body);
    if digest.as_slice() != checksum {
        return Err(Error::Validation("checkpoint checksum mismatch".into()));
    }
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
        if *pos + n > body.len() {
            return Err(Error::Validation("checkpoint truncated".into()));
        }
        let s = &body[*pos..*pos + n];
        *pos += n;
        Ok(s)
    };
    if take(&mut pos, 8)? != MAGIC {
        return Err(Error::Validation("not an MPS checkpoint".into()));
    }
    let n = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
    let trunc = f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
    let mut tensors = Vec::with_capacity(n);
    for _ in 0..n {
        let mut dims = [0usize; 3];
        for d in dims.iter_mut() {
            *d = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
        }
        let count = dims[0] * dims[1] * dims[2];
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            let re = f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
            let im = f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
            data.push(C64::new(re, im));
        }
        let t = Array3::from_shape_vec((dims[0], dims[1], dims[2]), data)
            .map_err(|e| Error::Validation(format!("bad tensor shape: {e}")))?;
        tensors.push(t);
    }
    if pos != body.len() {
        return Err(Error::Validation("trailing bytes in checkpoint".into()));
    }
    let mut out = MatrixProductState::from_tensors(tensors)?;
    out.truncation_error = trunc;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_bit_exact() {
        let a = MatrixProductState::basis_state(4, 0b0101);
        let b = MatrixProductState::basis_state(4, 0b1010);
        let mut st = MatrixProductState::direct_sum(&a, &b).unwrap();
        st.canonicalize().unwrap();
        let bytes = save_mps(&st);
        let back = load_mps(&bytes).unwrap();
        assert_eq!(st.site_count(), back.site_count());
        for i in 0..st.site_count() {
            let (x, y) = (st.tensor(i), back.tensor(i));
            assert_eq!(x.shape(), y.shape());
            for (p, q) in x.iter().zip(y.iter()) {
                assert_eq!(p.re.to_bits(), q.re.to_bits());
                assert_eq!(p.im.to_bits(), q.im.to_bits());
            }
        }
        // corruption is detected
        let mut bad = bytes.clone();
        let mid = bad.len() / 2;
        bad[mid] ^= 1;
        assert!(load_mps(&bad).is_err());
    }
}
