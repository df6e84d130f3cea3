//! Wire format for main-mechanism reports, unbiased integer rounding and
//! per-client communication accounting.
//!
//! Layout, all little-endian:
//!
//! | bytes | field |
//! |---|---|
//! | 1 | version (high nibble), discretized flag (bit 3), reserved (bits 0-2, zero) |
//! | 5 | bin hash seed |
//! | 5 | sign hash seed |
//! | 2 | `b` as u16 |
//! | 4·b | values: f32, or i32 when discretized |

use rand::Rng;

use crate::error::{Error, Result};
use crate::laplace::open_unit;
use crate::mechanism::{ClientReport, MechanismParams};
use crate::seed::WireSeed;

pub const WIRE_VERSION: u8 = 1;
pub const HEADER_BYTES: usize = 1 + 2 * WireSeed::BYTES + 2;
const DISCRETIZED_FLAG: u8 = 0b1000;
const RESERVED_MASK: u8 = 0b0111;

/// Rounds to `floor(x)` or `floor(x) + 1` so that the expectation is `x`.
pub fn dsc<R: Rng + ?Sized>(x: f64, rng: &mut R) -> Result<i64> {
    if !x.is_finite() {
        return Err(Error::param(format!("cannot discretize {x}")));
    }
    let floor = x.floor();
    let frac = x - floor;
    let up = frac > 0.0 && open_unit(rng) < frac;
    Ok(floor as i64 + up as i64)
}

/// `U = k + (Δ/ε)·ln(10·n·b/β)`.
pub fn transmit_bound(params: &MechanismParams) -> f64 {
    let nb = params.n() as f64 * params.bins() as f64;
    params.k() as f64 + params.laplace_scale() * (10.0 * nb / params.beta()).ln()
}

pub fn transmit_clip(value: f64, params: &MechanismParams) -> f64 {
    let u = transmit_bound(params);
    value.clamp(-u, u)
}

/// Clips every value to the transmit bound and rounds it without bias.
pub fn discretize<R: Rng + ?Sized>(report: &ClientReport, params: &MechanismParams, rng: &mut R) -> Result<ClientReport> {
    let u = transmit_bound(params);
    if u > i32::MAX as f64 {
        return Err(Error::param(format!("transmit bound {u} does not fit in i32")));
    }
    let bin_values = report
        .bin_values
        .iter()
        .map(|&v| dsc(v.clamp(-u, u), rng).map(|z| z as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClientReport {
        bin_values,
        discretized: true,
        ..report.clone()
    })
}

/// Serializes `report` as it stands. Float values are narrowed to f32;
/// discretized values must be integers in i32 range.
pub fn serialize(report: &ClientReport) -> Result<Vec<u8>> {
    let b = report.bins();
    if b == 0 || b > u16::MAX as usize {
        return Err(Error::Wire(format!("bin count {b} outside [1, {}]", u16::MAX)));
    }
    let mut out = Vec::with_capacity(wire_len(b));
    let flag = if report.discretized { DISCRETIZED_FLAG } else { 0 };
    out.push(WIRE_VERSION << 4 | flag);
    out.extend_from_slice(&report.seed_h.to_le_bytes());
    out.extend_from_slice(&report.seed_s.to_le_bytes());
    out.extend_from_slice(&(b as u16).to_le_bytes());
    for &v in &report.bin_values {
        if report.discretized {
            if v.fract() != 0.0 || v < i32::MIN as f64 || v > i32::MAX as f64 {
                return Err(Error::Wire(format!("discretized value {v} is not an i32")));
            }
            out.extend_from_slice(&(v as i32).to_le_bytes());
        } else {
            if !v.is_finite() {
                return Err(Error::Wire(format!("non-finite value {v}")));
            }
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(out)
}

/// Discretizes first when `params` is given, then serializes.
pub fn serialize_with<R: Rng + ?Sized>(
    report: &ClientReport,
    discretize_with: Option<&MechanismParams>,
    rng: &mut R,
) -> Result<Vec<u8>> {
    match discretize_with {
        Some(params) => serialize(&discretize(report, params, rng)?),
        None => serialize(report),
    }
}

pub fn deserialize(bytes: &[u8]) -> Result<ClientReport> {
    if bytes.len() < HEADER_BYTES {
        return Err(Error::Wire(format!("{} bytes is shorter than the header", bytes.len())));
    }
    let header = bytes[0];
    if header >> 4 != WIRE_VERSION {
        return Err(Error::Wire(format!("unsupported version {}", header >> 4)));
    }
    if header & RESERVED_MASK != 0 {
        return Err(Error::Wire("reserved header bits set".into()));
    }
    let discretized = header & DISCRETIZED_FLAG != 0;
    let seed = |at: usize| WireSeed::from_le_bytes(bytes[at..at + 5].try_into().expect("5-byte slice"));
    let (seed_h, seed_s) = (seed(1), seed(6));
    let b = u16::from_le_bytes([bytes[11], bytes[12]]) as usize;
    if b == 0 {
        return Err(Error::Wire("zero bins".into()));
    }
    if bytes.len() != wire_len(b) {
        return Err(Error::Wire(format!("expected {} bytes for b = {b}, got {}", wire_len(b), bytes.len())));
    }
    let bin_values = bytes[HEADER_BYTES..]
        .chunks_exact(4)
        .map(|c| {
            let raw: [u8; 4] = c.try_into().expect("4-byte chunk");
            if discretized {
                Ok(i32::from_le_bytes(raw) as f64)
            } else {
                let v = f32::from_le_bytes(raw);
                if v.is_finite() {
                    Ok(v as f64)
                } else {
                    Err(Error::Wire(format!("non-finite value {v}")))
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClientReport {
        seed_h,
        seed_s,
        bin_values,
        discretized,
    })
}

pub fn wire_len(bins: usize) -> usize {
    HEADER_BYTES + 4 * bins
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Accounting {
    /// Everything on the wire, both seeds and the header included.
    #[default]
    Wire,
    /// One seed plus four bytes per bin.
    SingleSeed,
}

pub fn comm_cost_for_bins(bins: usize, accounting: Accounting) -> Result<usize> {
    if bins == 0 {
        return Err(Error::param("a report has at least one bin"));
    }
    Ok(match accounting {
        Accounting::Wire => wire_len(bins),
        Accounting::SingleSeed => WireSeed::BYTES + 4 * bins,
    })
}

pub fn comm_cost(report: &ClientReport, accounting: Accounting) -> Result<usize> {
    comm_cost_for_bins(report.bins(), accounting)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::PrivacyBudget;
    use crate::mechanism::select_params;
    use crate::seed::rng_from_seed;
    use proptest::prelude::*;

    fn report(b: usize) -> ClientReport {
        ClientReport {
            seed_h: WireSeed::new(0xAB_CDEF_0123),
            seed_s: WireSeed::new(7),
            bin_values: (0..b).map(|j| j as f64 * 0.5 - 1.0).collect(),
            discretized: false,
        }
    }

    #[test]
    fn dsc_examples() {
        let mut rng = rng_from_seed(1);
        assert!((0..1000).all(|_| dsc(3.0, &mut rng).unwrap() == 3));
        let n = 100_000;
        let draws: Vec<i64> = (0..n).map(|_| dsc(2.25, &mut rng).unwrap()).collect();
        assert!(draws.iter().all(|&z| z == 2 || z == 3));
        let threes = draws.iter().filter(|&&z| z == 3).count() as f64 / n as f64;
        assert!((threes - 0.25).abs() < 0.005);
        let draws: Vec<i64> = (0..n).map(|_| dsc(-0.4, &mut rng).unwrap()).collect();
        assert!(draws.iter().all(|&z| z == -1 || z == 0));
        let mean = draws.iter().sum::<i64>() as f64 / n as f64;
        assert!((mean + 0.4).abs() < 0.005);
        assert!(dsc(f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn sizes_and_layout() {
        let bytes = serialize(&report(1)).unwrap();
        assert_eq!(bytes.len(), 17);
        assert_eq!(bytes[0], 0x10);
        assert_eq!(&bytes[1..6], &[0x23, 0x01, 0xEF, 0xCD, 0xAB]);
        assert_eq!(&bytes[11..13], &[1, 0]);
        assert_eq!(&bytes[13..], &(-1.0f32).to_le_bytes());
        assert_eq!(serialize(&report(16)).unwrap().len(), 77);
        assert_eq!(comm_cost(&report(1), Accounting::SingleSeed).unwrap(), 9);
        assert_eq!(comm_cost(&report(1), Accounting::Wire).unwrap(), 17);
        assert!(comm_cost_for_bins(0, Accounting::Wire).is_err());
        assert!(serialize(&report(0)).is_err());
    }

    #[test]
    fn malformed_inputs_rejected() {
        let good = serialize(&report(2)).unwrap();
        assert!(deserialize(&good[..12]).is_err());
        assert!(deserialize(&good[..good.len() - 1]).is_err());
        let mut bad = good.clone();
        bad[0] = 0x20;
        assert!(deserialize(&bad).is_err());
        let mut bad = good.clone();
        bad[0] |= 1;
        assert!(deserialize(&bad).is_err());
        let mut bad = good.clone();
        bad[11] = 0;
        bad[12] = 0;
        assert!(deserialize(&bad).is_err());
        let mut bad = good;
        bad[13..17].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(deserialize(&bad).is_err());
    }

    #[test]
    fn transmit_clip_examples() {
        let budget = PrivacyBudget::event_level(1.0, 64).unwrap();
        let params = select_params(64, 1000, 10_000, budget, 0.05).unwrap();
        let u = transmit_bound(&params);
        let expect = 64.0 + 2.0 * (10.0 * 10_000.0 * 16.0 / 0.05f64).ln();
        assert!((u - expect).abs() < 1e-9);
        assert_eq!(transmit_clip(1.5, &params), 1.5);
        assert_eq!(transmit_clip(u + 5.0, &params), u);
        assert_eq!(transmit_clip(-u - 5.0, &params), -u);
    }

    #[test]
    fn discretized_round_trip() {
        let budget = PrivacyBudget::event_level(1.0, 4).unwrap();
        let params = select_params(4, 100, 100, budget, 0.05).unwrap();
        let mut rng = rng_from_seed(2);
        let r = ClientReport {
            bin_values: vec![0.3; params.bins()],
            ..report(params.bins())
        };
        let bytes = serialize_with(&r, Some(&params), &mut rng).unwrap();
        assert_eq!(bytes[0], 0x18);
        let back = deserialize(&bytes).unwrap();
        assert!(back.discretized);
        assert!(back.bin_values.iter().all(|&v| v == 0.0 || v == 1.0));
        assert_eq!(serialize(&back).unwrap(), bytes);
    }

    proptest! {
        #[test]
        fn bytes_round_trip(
            h in 0u64..(1 << 40),
            s in 0u64..(1 << 40),
            disc in any::<bool>(),
            floats in prop::collection::vec(-1e6f32..1e6, 1..40),
            ints in prop::collection::vec(any::<i32>(), 1..40),
        ) {
            let bin_values: Vec<f64> = if disc {
                ints.iter().map(|&z| z as f64).collect()
            } else {
                floats.iter().map(|&z| z as f64).collect()
            };
            let r = ClientReport { seed_h: WireSeed::new(h), seed_s: WireSeed::new(s), bin_values, discretized: disc };
            let bytes = serialize(&r).unwrap();
            prop_assert_eq!(bytes.len(), wire_len(r.bins()));
            let back = deserialize(&bytes).unwrap();
            prop_assert_eq!(&back, &r);
            prop_assert_eq!(serialize(&back).unwrap(), bytes);
        }
    }
}
