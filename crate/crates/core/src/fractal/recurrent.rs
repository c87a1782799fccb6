use alloc::format;
use alloc::vec::Vec;

use super::ifs::Ifs;
use crate::error::{Error, Result};

/// One linear unit pair computing `W p + b` for a single map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapSubnet {
    /// `[[a, 0], [c, d]]`.
    pub weights: [[f64; 2]; 2],
    /// `[e, f]`.
    pub bias: [f64; 2],
}

impl MapSubnet {
    #[inline]
    fn forward(&self, p: [f64; 2]) -> [f64; 2] {
        let w = &self.weights;
        [
            w[0][0] * p[0] + w[0][1] * p[1] + self.bias[0],
            w[1][0] * p[0] + w[1][1] * p[1] + self.bias[1],
        ]
    }
}

/// A recurrent net whose state is a point of the plane. Each step feeds the
/// state through every subnet and keeps the output selected by a one-hot
/// gate vector, so a selector sequence reproduces a chaos-game orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentIfsNet {
    pub subnets: Vec<MapSubnet>,
    pub initial: [f64; 2],
}

pub fn encode_ifs_as_recurrent_net(ifs: &Ifs) -> RecurrentIfsNet {
    let subnets = ifs
        .maps
        .iter()
        .map(|w| MapSubnet { weights: [[w.a, 0.0], [w.c, w.d]], bias: [w.e, w.f] })
        .collect();
    RecurrentIfsNet { subnets, initial: ifs.nodes[0] }
}

/// Gate vector of length `n` with a single 1 at `index`.
pub fn one_hot(index: usize, n: usize) -> Vec<f64> {
    let mut v = alloc::vec![0.0; n];
    v[index] = 1.0;
    v
}

fn selected(gate: &[f64], n: usize) -> Option<usize> {
    if gate.len() != n {
        return None;
    }
    let mut hit = None;
    for (j, &g) in gate.iter().enumerate() {
        if g == 1.0 {
            if hit.is_some() {
                return None;
            }
            hit = Some(j);
        } else if g != 0.0 {
            return None;
        }
    }
    hit
}

impl RecurrentIfsNet {
    pub fn n_maps(&self) -> usize {
        self.subnets.len()
    }

    /// One step: the gated sum `Σ_j g_j (W_j p + b_j)`. `step` only labels the
    /// error when `gate` is not one-hot.
    pub fn step(&self, p: [f64; 2], gate: &[f64], step: usize) -> Result<[f64; 2]> {
        let j = selected(gate, self.subnets.len()).ok_or(Error::SelectorNotOneHot { step })?;
        Ok(self.subnets[j].forward(p))
    }

    /// Runs from the initial state; one output per gate vector.
    pub fn run(&self, gates: &[Vec<f64>]) -> Result<Vec<[f64; 2]>> {
        let mut p = self.initial;
        gates
            .iter()
            .enumerate()
            .map(|(t, g)| {
                p = self.step(p, g, t)?;
                Ok(p)
            })
            .collect()
    }

    /// Runs with map indices in place of gate vectors.
    pub fn run_indices(&self, selectors: &[usize]) -> Result<Vec<[f64; 2]>> {
        let n = self.subnets.len();
        if let Some((t, &j)) = selectors.iter().enumerate().find(|(_, &j)| j >= n) {
            return Err(Error::InvalidArgument(format!(
                "selector {j} at step {t} exceeds the {n} maps"
            )));
        }
        let gates: Vec<_> = selectors.iter().map(|&j| one_hot(j, n)).collect();
        self.run(&gates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::ifs::{chaos_orbit, chaos_selectors, fif_from_nodes, rational};
    use alloc::vec;

    fn ifs() -> Ifs {
        let q = rational;
        fif_from_nodes(
            vec![(q(0, 1), q(1, 3)), (q(1, 3), q(1, 1)), (q(2, 3), q(0, 1)), (q(1, 1), q(1, 2))],
            q(1, 4),
        )
        .unwrap()
        .to_ifs()
        .unwrap()
    }

    #[test]
    fn matches_chaos_orbit_bitwise() {
        let ifs = ifs();
        let net = encode_ifs_as_recurrent_net(&ifs);
        let sel = chaos_selectors(11, ifs.maps.len(), 500);
        assert_eq!(net.run_indices(&sel).unwrap(), chaos_orbit(&ifs, &sel));
    }

    #[test]
    fn rejects_bad_gates() {
        let net = encode_ifs_as_recurrent_net(&ifs());
        let gates = vec![one_hot(0, 3), vec![1.0, 1.0, 0.0]];
        assert_eq!(net.run(&gates), Err(Error::SelectorNotOneHot { step: 1 }));
        assert!(net.run(&[vec![0.5, 0.5, 0.0]]).is_err());
        assert!(net.run(&[vec![1.0, 0.0]]).is_err());
        assert!(net.run(&[vec![0.0, 0.0, 0.0]]).is_err());
    }
}
