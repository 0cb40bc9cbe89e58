//! Multiplication counts of one solver iteration.

use serde::{Deserialize, Serialize};

/// Dimensions with `K` users per cell and direction, `A_b` base-station
/// antennas, `A_u` user antennas and `N_s` streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityInput {
    pub cells: u64,
    pub users: u64,
    pub bs_antennas: u64,
    pub ue_antennas: u64,
    pub streams: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityEstimate {
    /// Multiplications for one downlink precoder.
    pub m_v: u128,
    /// Multiplications for one downlink power coefficient.
    pub m_alpha: u128,
    pub total: u128,
    /// One `A_b x A_b` eigen-decomposition and inverse come on top of `total`.
    pub extra_cubic_dim: u64,
    pub order: String,
}

pub fn complexity_estimate(input: ComplexityInput) -> ComplexityEstimate {
    let g = input.cells as u128;
    let k = input.users as u128;
    let ab = input.bs_antennas as u128;
    let au = input.ue_antennas as u128;
    let ns = input.streams as u128;

    let omega = 3 * ab.pow(3) + ab.pow(2) * (2 * au + 3 * ns + 6) + ab * (au.pow(2) + 2 * au * ns) + au.pow(2) * ns;
    let m_v = g * k * omega + ab.pow(3) + ab.pow(2) * au + ab * au * ns;

    let chi = 2 * ab.pow(3)
        + ab.pow(2) * (au + 5 * ns + 2)
        + ab * (au.pow(2) + 4 * au * ns + ns.pow(2))
        + au.pow(2) * ns
        + 2 * au * ns
        + 2 * ns.pow(2);
    let m_alpha = g * k * chi + ab.pow(2) * ns + ab * (au * ns + ns.pow(2));

    ComplexityEstimate {
        m_v,
        m_alpha,
        total: m_v + m_alpha,
        extra_cubic_dim: input.bs_antennas,
        order: "O(G·K·A_b³)".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(g: u64, k: u64, ab: u64, au: u64, ns: u64) -> ComplexityEstimate {
        complexity_estimate(ComplexityInput {
            cells: g,
            users: k,
            bs_antennas: ab,
            ue_antennas: au,
            streams: ns,
        })
    }

    #[test]
    fn unit_dimensions() {
        let e = est(1, 1, 1, 1, 1);
        assert_eq!((e.m_v, e.m_alpha, e.total), (21, 24, 45));
        assert_eq!(e.order, "O(G·K·A_b³)");
    }

    #[test]
    fn cubic_in_bs_antennas() {
        let r = est(2, 2, 1 << 16, 2, 2).m_v as f64 / est(2, 2, 1 << 15, 2, 2).m_v as f64;
        assert!((r - 8.0).abs() < 1e-3);
    }
}
