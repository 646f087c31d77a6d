//! Exact log-domain forward-backward (BCJR) symbol decoding on a trellis.
//!
//! Branch metrics sum `(1 - 2 bit) * llr / 2` over output bits and
//! `(1 - 2 bit) * apriori / 2` over input bits, so all recursions are exact
//! a-posteriori computations (log-sum-exp, not a max approximation).
//!
//! Zero-terminated trellises pin both boundaries to the zero state.
//! Tail-biting trellises use wrap-around initialization: one calibration
//! pass from a uniform boundary estimates the circular state distribution,
//! and a second pass decodes with it.

use crate::convcode::{BoundaryMode, Transition, Trellis};

/// A-posteriori and extrinsic log-ratios per information bit.
#[derive(Clone, Debug)]
pub struct BcjrOutput {
    /// `log P(bit = 0 | r) - log P(bit = 1 | r)` per information bit.
    pub aposteriori: Vec<f64>,
    /// A-posteriori minus a-priori minus the systematic channel term.
    pub extrinsic: Vec<f64>,
}

const NEG_INF: f64 = f64::NEG_INFINITY;

/// Exact Jacobian logarithm `ln(e^a + e^b)`.
#[inline]
fn max_star(a: f64, b: f64) -> f64 {
    if a == NEG_INF {
        return b;
    }
    if b == NEG_INF {
        return a;
    }
    a.max(b) + (-(a - b).abs()).exp().ln_1p()
}

/// Runs the forward-backward algorithm.
///
/// `channel_llrs` is indexed `[section * N + output]` over all sections
/// (including flush sections of terminated trellises); `apriori` is indexed
/// `[section * K + input_bit]` over the information sections only. Returns
/// one a-posteriori and extrinsic value per information bit in the same
/// indexing.
pub fn bcjr(trellis: &Trellis, channel_llrs: &[f64], apriori: &[f64]) -> BcjrOutput {
    let n_out = trellis.n_out();
    let k_in = trellis.k_in();
    let info = trellis.info_sections();
    let total = trellis.total_sections();
    let states = trellis.num_states();
    let inputs = trellis.inputs_per_state();
    assert_eq!(channel_llrs.len(), total * n_out);
    assert_eq!(apriori.len(), info * k_in);

    // Branch metrics, info sections: [sec][state * inputs + input].
    let metric = |out: u32, input: u32, sec: usize| -> f64 {
        let mut g = 0.0;
        for o in 0..n_out {
            let sign = 1.0 - 2.0 * ((out >> o) & 1) as f64;
            g += sign * channel_llrs[sec * n_out + o] / 2.0;
        }
        if sec < info {
            for b in 0..k_in {
                let sign = 1.0 - 2.0 * ((input >> b) & 1) as f64;
                g += sign * apriori[sec * k_in + b] / 2.0;
            }
        }
        g
    };
    let mut gammas = vec![0.0f64; total * states * inputs];
    for sec in 0..total {
        for state in 0..states {
            if sec < info {
                for input in 0..inputs {
                    let e = trellis.edge(state, input);
                    gammas[(sec * states + state) * inputs + input] =
                        metric(e.output, e.input, sec);
                }
            } else {
                let e = trellis.tail_edge(state);
                gammas[(sec * states + state) * inputs] = metric(e.output, e.input, sec);
            }
        }
    }
    let edge_at = |sec: usize, state: usize, input: usize| -> (Transition, f64) {
        if sec < info {
            (trellis.edge(state, input), gammas[(sec * states + state) * inputs + input])
        } else {
            (trellis.tail_edge(state), gammas[(sec * states + state) * inputs])
        }
    };
    let inputs_at = |sec: usize| if sec < info { inputs } else { 1 };

    let forward = |init: &[f64]| -> Vec<Vec<f64>> {
        let mut alphas = Vec::with_capacity(total + 1);
        alphas.push(init.to_vec());
        for sec in 0..total {
            let mut next = vec![NEG_INF; states];
            for state in 0..states {
                let a = alphas[sec][state];
                if a == NEG_INF {
                    continue;
                }
                for input in 0..inputs_at(sec) {
                    let (e, g) = edge_at(sec, state, input);
                    let tgt = &mut next[e.next as usize];
                    *tgt = max_star(*tgt, a + g);
                }
            }
            normalize(&mut next);
            alphas.push(next);
        }
        alphas
    };
    let backward = |init: &[f64]| -> Vec<Vec<f64>> {
        let mut betas = vec![Vec::new(); total + 1];
        betas[total] = init.to_vec();
        for sec in (0..total).rev() {
            let mut prev = vec![NEG_INF; states];
            for state in 0..states {
                for input in 0..inputs_at(sec) {
                    let (e, g) = edge_at(sec, state, input);
                    let b = betas[sec + 1][e.next as usize];
                    if b == NEG_INF {
                        continue;
                    }
                    prev[state] = max_star(prev[state], g + b);
                }
            }
            normalize(&mut prev);
            betas[sec] = prev;
        }
        betas
    };

    let (alphas, betas) = match trellis.boundary() {
        BoundaryMode::ZeroTerminated => {
            let mut a0 = vec![NEG_INF; states];
            a0[0] = 0.0;
            let mut b0 = vec![NEG_INF; states];
            b0[0] = 0.0;
            (forward(&a0), backward(&b0))
        }
        BoundaryMode::TailBiting => {
            // Calibration pass from uniform boundaries, then the real pass
            // from the wrapped-around distributions.
            let uniform = vec![0.0; states];
            let a_cal = forward(&uniform);
            let b_cal = backward(&uniform);
            (forward(&a_cal[total]), backward(&b_cal[0]))
        }
    };

    let mut aposteriori = vec![0.0; info * k_in];
    let mut extrinsic = vec![0.0; info * k_in];
    for sec in 0..info {
        for bit in 0..k_in {
            let mut num = NEG_INF; // bit = 0
            let mut den = NEG_INF; // bit = 1
            for state in 0..states {
                let a = alphas[sec][state];
                if a == NEG_INF {
                    continue;
                }
                for input in 0..inputs {
                    let (e, g) = edge_at(sec, state, input);
                    let b = betas[sec + 1][e.next as usize];
                    if b == NEG_INF {
                        continue;
                    }
                    let m = a + g + b;
                    if (e.input >> bit) & 1 == 0 {
                        num = max_star(num, m);
                    } else {
                        den = max_star(den, m);
                    }
                }
            }
            let app = num - den;
            let idx = sec * k_in + bit;
            aposteriori[idx] = app;
            extrinsic[idx] = app - apriori[idx] - channel_llrs[sec * n_out + bit];
        }
    }
    BcjrOutput { aposteriori, extrinsic }
}

fn normalize(values: &mut [f64]) {
    let max = values.iter().cloned().fold(NEG_INF, f64::max);
    if max != NEG_INF {
        for v in values.iter_mut() {
            *v -= max;
        }
    }
}
