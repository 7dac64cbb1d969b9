//! Transfer-matrix contraction of string operators between two MPSs, and
//! single-qubit projection.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::mps::{contract_left, contract_right, MatrixProductState};
use crate::error::{Error, Result};

/// `<bra| O_1 x O_2 x ... |ket>` contracted left to right; `None` entries are
/// identity. Cost O(N D^3).
pub fn string_expectation(
    bra: &MatrixProductState,
    ket: &MatrixProductState,
    ops: &[Option<Array2<C64>>],
) -> Result<C64> {
    let n = bra.site_count();
    if ket.site_count() != n || ops.len() != n {
        return Err(Error::Structural("string contraction size mismatch".into()));
    }
    // environment E[b, a] between bra bond b and ket bond a
    let mut env: Array2<C64> = Array2::from_elem((1, 1), C64::new(1.0, 0.0));
    for i in 0..n {
        let tb = bra.tensor(i);
        let ta = ket.tensor(i);
        let (lb, rb) = (tb.shape()[0], tb.shape()[2]);
        let (la, ra) = (ta.shape()[0], ta.shape()[2]);
        let mut next: Array2<C64> = Array2::zeros((rb, ra));
        for s_ket in 0..2 {
            // op column: sum_{s_bra} conj(bra[s_bra]) O[s_bra, s_ket]
            for s_bra in 0..2 {
                let w = match &ops[i] {
                    Some(o) => o[(s_bra, s_ket)],
                    None => {
                        if s_bra == s_ket {
                            C64::new(1.0, 0.0)
                        } else {
                            continue;
                        }
                    }
                };
                if w.norm() == 0.0 {
                    continue;
                }
                // next[b', a'] += sum_{b, a} env[b, a] conj(tb[b, s_bra, b']) w ta[a, s_ket, a']
                for bp in 0..rb {
                    for ap in 0..ra {
                        let mut acc = C64::new(0.0, 0.0);
                        for b in 0..lb {
                            for a in 0..la {
                                acc += env[(b, a)]
                                    * tb[(b, s_bra, bp)].conj()
                                    * ta[(a, s_ket, ap)];
                            }
                        }
                        next[(bp, ap)] += acc * w;
                    }
                }
            }
        }
        env = next;
    }
    Ok(env[(0, 0)])
}

/// Projects `site` onto the single-qubit ket `e`, merging the contracted
/// matrix into a neighbor. The result lives on one fewer site; the returned
/// weight is the squared norm of the projected (unnormalized) state. Bond
/// dimensions do not increase.
pub fn project_qubit(
    state: &MatrixProductState,
    site: usize,
    e: &[C64; 2],
) -> Result<(MatrixProductState, f64)> {
    let n = state.site_count();
    if site >= n {
        return Err(Error::Structural("projection site out of range".into()));
    }
    if n == 1 {
        return Err(Error::Structural("cannot project the last remaining qubit".into()));
    }
    let t = state.tensor(site);
    let (dl, dr) = (t.shape()[0], t.shape()[2]);
    // v[a, b] = sum_s conj(e[s]) t[a, s, b]
    let mut v: Array2<C64> = Array2::zeros((dl, dr));
    for a in 0..dl {
        for b in 0..dr {
            v[(a, b)] = e[0].conj() * t[(a, 0, b)] + e[1].conj() * t[(a, 1, b)];
        }
    }
    let mut tensors: Vec<_> = (0..n).filter(|&i| i != site).map(|i| state.tensor(i).clone()).collect();
    if site > 0 {
        tensors[site - 1] = contract_right(&tensors[site - 1], &v);
    } else {
        tensors[0] = contract_left(&v, &tensors[0]);
    }
    let mut out = MatrixProductState::from_tensors(tensors)?;
    out.truncation_error = state.truncation_error;
    let w = out.norm_sqr();
    if w < 1e-14 {
        return Err(Error::Degenerate(format!("projection weight {w:.3e} vanishes")));
    }
    Ok((out, w))
}
