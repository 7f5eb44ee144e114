//! Keyed random streams, Brownian paths on a fine grid and the uniform
//! randomization stream used by the randomized schemes.
//!
//! Every random number is a pure function of `(seed, sample_index, purpose,
//! counter)` through a Philox4x32-10 block cipher, so any increment of any path
//! can be regenerated in isolation and two purposes never share a counter.
//! Paths are materialized once when they fit in the memory budget and are
//! otherwise evaluated on demand; both modes produce identical bits.

use std::f64::consts::TAU;
use std::sync::Arc;

use crate::error::{Error, Result};

const PHILOX_M0: u64 = 0xD251_1F53;
const PHILOX_M1: u64 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

/// Philox4x32 with ten rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Philox4x32 {
    key: [u32; 2],
}

impl Philox4x32 {
    pub fn new(key: [u32; 2]) -> Self {
        Self { key }
    }

    pub fn from_seed(seed: u64) -> Self {
        Self::new([seed as u32, (seed >> 32) as u32])
    }

    #[inline]
    pub fn block(&self, counter: [u32; 4]) -> [u32; 4] {
        let mut c = counter;
        let mut k = self.key;
        for round in 0..10 {
            if round > 0 {
                k[0] = k[0].wrapping_add(PHILOX_W0);
                k[1] = k[1].wrapping_add(PHILOX_W1);
            }
            let p0 = PHILOX_M0 * c[0] as u64;
            let p1 = PHILOX_M1 * c[2] as u64;
            c = [
                ((p1 >> 32) as u32) ^ c[1] ^ k[0],
                p1 as u32,
                ((p0 >> 32) as u32) ^ c[3] ^ k[1],
                p0 as u32,
            ];
        }
        c
    }
}

/// What a stream is used for. Each purpose owns a disjoint counter domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u32)]
pub enum Purpose {
    Brownian = 0,
    Tau = 1,
    ReferenceTau = 2,
    ReferenceBridge = 3,
    InitialState = 4,
    Probe = 5,
    Auxiliary = 6,
}

/// Largest admissible sample index (60 bits).
pub const MAX_SAMPLE_INDEX: u64 = (1 << 60) - 1;

/// Identifies one random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub sample_index: u64,
    pub purpose: Purpose,
}

impl StreamKey {
    pub fn new(seed: u64, sample_index: u64, purpose: Purpose) -> Self {
        assert!(
            sample_index <= MAX_SAMPLE_INDEX,
            "sample index {sample_index} exceeds 60 bits"
        );
        Self {
            seed,
            sample_index,
            purpose,
        }
    }

    pub fn with_purpose(self, purpose: Purpose) -> Self {
        Self { purpose, ..self }
    }

    /// Raw 128-bit block at position `index` of this stream.
    #[inline]
    pub fn block(&self, index: u64) -> [u32; 4] {
        let hi = ((self.sample_index >> 32) as u32) | ((self.purpose as u32) << 28);
        let counter = [
            index as u32,
            (index >> 32) as u32,
            self.sample_index as u32,
            hi,
        ];
        Philox4x32::from_seed(self.seed).block(counter)
    }

    /// Two uniforms in the open interval (0, 1).
    #[inline]
    pub fn uniform_pair(&self, index: u64) -> (f64, f64) {
        let b = self.block(index);
        let a = ((b[1] as u64) << 32) | b[0] as u64;
        let c = ((b[3] as u64) << 32) | b[2] as u64;
        (open_unit(a), open_unit(c))
    }

    /// Two independent standard normals (Box–Muller on one block).
    #[inline]
    pub fn normal_pair(&self, index: u64) -> (f64, f64) {
        let (u1, u2) = self.uniform_pair(index);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        (r * c, r * s)
    }

    /// Fills `out` with normals drawn from blocks `first_block, first_block + 1, ...`.
    pub fn fill_normals(&self, first_block: u64, out: &mut [f64]) {
        for (j, chunk) in out.chunks_mut(2).enumerate() {
            let (a, b) = self.normal_pair(first_block + j as u64);
            chunk[0] = a;
            if let Some(slot) = chunk.get_mut(1) {
                *slot = b;
            }
        }
    }
}

#[inline]
fn open_unit(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Storage policy for [`BrownianPath`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOptions {
    pub memory_budget_bytes: u64,
    pub allow_streaming: bool,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            memory_budget_bytes: 512 * 1024 * 1024,
            allow_streaming: true,
        }
    }
}

/// Default fine resolution of the reference grid.
pub const DEFAULT_H_REF: f64 = 1.0 / 4096.0;

/// Minimum number of fine steps per coarse step for sub-step extraction.
pub const MIN_SUBSTEP_RATIO: u64 = 16;

/// Number of fine steps of size `fine` in `span`, if it is a positive integer.
pub fn grid_ratio(span: f64, fine: f64) -> Result<u64> {
    if !(span.is_finite() && fine.is_finite()) || span <= 0.0 || fine <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "grid spans must be positive and finite (span {span}, fine {fine})"
        )));
    }
    let r = (span / fine).round();
    if !(1.0..=9.0e15).contains(&r) || ((r * fine - span).abs() > 1e-9 * span) {
        return Err(Error::Grid(format!(
            "{span} is not an integer multiple of {fine}"
        )));
    }
    Ok(r as u64)
}

/// Like [`grid_ratio`] but additionally requires a power of two.
pub fn dyadic_ratio(span: f64, fine: f64) -> Result<u64> {
    let r = grid_ratio(span, fine)?;
    if !r.is_power_of_two() {
        return Err(Error::Grid(format!(
            "{span} is not a dyadic multiple of {fine} (ratio {r})"
        )));
    }
    Ok(r)
}

/// A quantized intermediate time inside one coarse step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizedTau {
    /// Fine steps covered by the sub-increment.
    pub fine_steps: u64,
    /// `fine_steps / ratio`.
    pub tau: f64,
}

/// Rounds `tau` onto the fine grid of a step holding `ratio` fine steps,
/// clamped to `[1/ratio, 1 - 1/ratio]`.
pub fn quantize_tau(tau: f64, ratio: u64) -> QuantizedTau {
    debug_assert!(ratio >= 2);
    let q = (tau * ratio as f64).round().clamp(1.0, (ratio - 1) as f64) as u64;
    QuantizedTau {
        fine_steps: q,
        tau: q as f64 / ratio as f64,
    }
}

/// One Brownian sample path, addressable by fine increment index.
#[derive(Debug, Clone)]
pub struct BrownianPath {
    key: StreamKey,
    dim: usize,
    h_ref: f64,
    n_fine: u64,
    negated: bool,
    store: Option<Arc<[f64]>>,
}

/// Builds the path for `(seed, sample_index)` over `[0, horizon]` with the
/// default storage policy.
pub fn make_path(
    seed: u64,
    sample_index: u64,
    dim: usize,
    horizon: f64,
    h_ref: f64,
) -> Result<BrownianPath> {
    BrownianPath::new(
        seed,
        sample_index,
        dim,
        horizon,
        h_ref,
        &PathOptions::default(),
    )
}

impl BrownianPath {
    pub fn new(
        seed: u64,
        sample_index: u64,
        dim: usize,
        horizon: f64,
        h_ref: f64,
        options: &PathOptions,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if sample_index > MAX_SAMPLE_INDEX {
            return Err(Error::InvalidParameter(format!(
                "sample index {sample_index} exceeds 60 bits"
            )));
        }
        let n_fine = grid_ratio(horizon, h_ref)?;
        let bytes = n_fine as u128 * dim as u128 * 8;
        let materialize = bytes <= options.memory_budget_bytes as u128;
        if !materialize && !options.allow_streaming {
            return Err(Error::MemoryBudget {
                bytes,
                budget: options.memory_budget_bytes,
            });
        }
        let mut path = Self {
            key: StreamKey::new(seed, sample_index, Purpose::Brownian),
            dim,
            h_ref,
            n_fine,
            negated: false,
            store: None,
        };
        if materialize {
            let mut data = vec![0.0; n_fine as usize * dim];
            for (k, chunk) in data.chunks_mut(dim).enumerate() {
                path.generate(k as u64, chunk);
            }
            path.store = Some(data.into());
        }
        Ok(path)
    }

    pub fn key(&self) -> StreamKey {
        self.key
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h_ref(&self) -> f64 {
        self.h_ref
    }

    pub fn n_fine(&self) -> u64 {
        self.n_fine
    }

    pub fn horizon(&self) -> f64 {
        self.n_fine as f64 * self.h_ref
    }

    pub fn is_materialized(&self) -> bool {
        self.store.is_some()
    }

    pub fn is_mirrored(&self) -> bool {
        self.negated
    }

    /// The antithetic path `-W`, sharing storage with `self`.
    pub fn mirrored(&self) -> Self {
        Self {
            negated: !self.negated,
            ..self.clone()
        }
    }

    fn blocks_per_increment(&self) -> u64 {
        self.dim.div_ceil(2) as u64
    }

    fn generate(&self, k: u64, out: &mut [f64]) {
        let scale = self.h_ref.sqrt();
        self.key.fill_normals(k * self.blocks_per_increment(), out);
        for v in out.iter_mut() {
            *v *= scale;
        }
    }

    /// Writes the fine increment `W_{(k+1)h_ref} - W_{k h_ref}` into `out`.
    #[inline]
    pub fn fine_increment_into(&self, k: u64, out: &mut [f64]) {
        assert!(
            k < self.n_fine,
            "fine index {k} beyond path end {}",
            self.n_fine
        );
        match &self.store {
            Some(data) => {
                let start = k as usize * self.dim;
                out.copy_from_slice(&data[start..start + self.dim]);
            }
            None => self.generate(k, out),
        }
        if self.negated {
            for v in out.iter_mut() {
                *v = -*v;
            }
        }
    }

    pub fn fine_increment(&self, k: u64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.fine_increment_into(k, &mut out);
        out
    }

    /// Adds fine increments `start..end` to `acc`, left to right.
    #[inline]
    pub fn accumulate(&self, start: u64, end: u64, acc: &mut [f64]) {
        assert!(
            end <= self.n_fine,
            "fine index {end} beyond path end {}",
            self.n_fine
        );
        match &self.store {
            Some(data) => {
                let d = self.dim;
                let rows = &data[start as usize * d..end as usize * d];
                if self.negated {
                    for row in rows.chunks_exact(d) {
                        for (a, v) in acc.iter_mut().zip(row) {
                            *a += -*v;
                        }
                    }
                } else {
                    for row in rows.chunks_exact(d) {
                        for (a, v) in acc.iter_mut().zip(row) {
                            *a += *v;
                        }
                    }
                }
            }
            None => {
                let mut buf = vec![0.0; self.dim];
                for k in start..end {
                    self.fine_increment_into(k, &mut buf);
                    for (a, v) in acc.iter_mut().zip(&buf) {
                        *a += *v;
                    }
                }
            }
        }
    }

    /// `W_{(n+1)h} - W_{nh}` for a coarse step of `ratio` fine steps.
    pub fn coarse_increment_into(&self, n: u64, ratio: u64, out: &mut [f64]) {
        out.fill(0.0);
        self.accumulate(n * ratio, (n + 1) * ratio, out);
    }

    /// `W_{(n+1)h} - W_{nh}`; `h` must be a multiple of the fine step.
    pub fn coarse_increment(&self, n: u64, h: f64) -> Result<Vec<f64>> {
        let ratio = grid_ratio(h, self.h_ref)?;
        self.check_range(n, ratio)?;
        let mut out = vec![0.0; self.dim];
        self.coarse_increment_into(n, ratio, &mut out);
        Ok(out)
    }

    /// Writes the sub-increment up to the quantized `tau` into `dw_tau` and the
    /// full coarse increment into `dw` in a single left-to-right pass, so `dw`
    /// is bit-identical to [`coarse_increment_into`](Self::coarse_increment_into).
    pub fn split_increment_into(
        &self,
        n: u64,
        ratio: u64,
        tau: f64,
        dw_tau: &mut [f64],
        dw: &mut [f64],
    ) -> QuantizedTau {
        let q = quantize_tau(tau, ratio);
        let start = n * ratio;
        dw.fill(0.0);
        self.accumulate(start, start + q.fine_steps, dw);
        dw_tau.copy_from_slice(dw);
        self.accumulate(start + q.fine_steps, start + ratio, dw);
        q
    }

    /// `(tau_q, W_{nh + tau_q h} - W_{nh})`. Requires at least
    /// [`MIN_SUBSTEP_RATIO`] fine steps per coarse step.
    pub fn sub_increment(&self, n: u64, h: f64, tau: f64) -> Result<(f64, Vec<f64>)> {
        self.sub_increment_with_guard(n, h, tau, MIN_SUBSTEP_RATIO)
    }

    /// [`sub_increment`](Self::sub_increment) with an explicit minimum ratio (at least 2).
    pub fn sub_increment_with_guard(
        &self,
        n: u64,
        h: f64,
        tau: f64,
        min_ratio: u64,
    ) -> Result<(f64, Vec<f64>)> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tau = {tau} outside (0, 1)"
            )));
        }
        let ratio = grid_ratio(h, self.h_ref)?;
        let min = min_ratio.max(2);
        if ratio < min {
            return Err(Error::QuantizationGuard { ratio, min });
        }
        self.check_range(n, ratio)?;
        let mut dw_tau = vec![0.0; self.dim];
        let mut dw = vec![0.0; self.dim];
        let q = self.split_increment_into(n, ratio, tau, &mut dw_tau, &mut dw);
        Ok((q.tau, dw_tau))
    }

    /// Brownian-bridge point inside fine step `k`: `W_{k h_ref + tau h_ref} - W_{k h_ref}`
    /// given the fine increment `dw_fine`, using the path's bridge stream.
    pub fn bridge_point_into(&self, k: u64, tau: f64, dw_fine: &[f64], out: &mut [f64]) {
        let key = self.key.with_purpose(Purpose::ReferenceBridge);
        key.fill_normals(k * self.blocks_per_increment(), out);
        let spread = (tau * (1.0 - tau) * self.h_ref).sqrt();
        let sign = if self.negated { -1.0 } else { 1.0 };
        for (o, w) in out.iter_mut().zip(dw_fine) {
            *o = tau * w + sign * spread * *o;
        }
    }

    fn check_range(&self, n: u64, ratio: u64) -> Result<()> {
        let needed = (n + 1) * ratio;
        if needed > self.n_fine {
            return Err(Error::NoiseExhausted {
                needed,
                available: self.n_fine,
            });
        }
        Ok(())
    }
}

/// The i.i.d. U(0,1) stream `tau_1, tau_2, ...` of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TauStream {
    key: StreamKey,
}

impl TauStream {
    pub fn new(seed: u64, sample_index: u64) -> Self {
        Self {
            key: StreamKey::new(seed, sample_index, Purpose::Tau),
        }
    }

    /// The stream driving the fine-grid reference solver of the same sample.
    pub fn reference(seed: u64, sample_index: u64) -> Self {
        Self {
            key: StreamKey::new(seed, sample_index, Purpose::ReferenceTau),
        }
    }

    pub fn key(&self) -> StreamKey {
        self.key
    }

    /// `tau_n` for `n >= 1`, strictly inside (0, 1).
    ///
    /// # Panics
    /// If `n == 0`.
    #[inline]
    pub fn draw(&self, n: u64) -> f64 {
        assert!(n >= 1, "tau stream is indexed from 1");
        self.key.uniform_pair(n).0
    }
}

pub fn draw_tau(stream: &TauStream, n: u64) -> f64 {
    stream.draw(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn philox_known_answers() {
        let zero = Philox4x32::new([0, 0]).block([0; 4]);
        assert_eq!(zero, [0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8]);
        let ones = Philox4x32::new([u32::MAX; 2]).block([u32::MAX; 4]);
        assert_eq!(ones, [0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd]);
        let pi = Philox4x32::new([0xa4093822, 0x299f31d0])
            .block([0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344]);
        assert_eq!(pi, [0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1]);
    }

    #[test]
    fn path_has_expected_shape() {
        let p = make_path(1, 0, 2, 1.0, 0.25).unwrap();
        assert_eq!(p.n_fine(), 4);
        for k in 0..4 {
            assert_eq!(p.fine_increment(k).len(), 2);
        }
    }

    #[test]
    fn replay_is_bit_identical() {
        let a = make_path(7, 3, 3, 1.0, 1.0 / 64.0).unwrap();
        let b = make_path(7, 3, 3, 1.0, 1.0 / 64.0).unwrap();
        for k in 0..64 {
            assert_eq!(a.fine_increment(k), b.fine_increment(k));
        }
    }

    #[test]
    fn streaming_matches_materialized() {
        let opts = PathOptions {
            memory_budget_bytes: 0,
            allow_streaming: true,
        };
        let lazy = BrownianPath::new(5, 9, 3, 1.0, 1.0 / 32.0, &opts).unwrap();
        let full = make_path(5, 9, 3, 1.0, 1.0 / 32.0).unwrap();
        assert!(!lazy.is_materialized() && full.is_materialized());
        for k in 0..32 {
            assert_eq!(lazy.fine_increment(k), full.fine_increment(k));
        }
        assert_eq!(
            lazy.coarse_increment(1, 0.25).unwrap(),
            full.coarse_increment(1, 0.25).unwrap()
        );
    }

    #[test]
    fn budget_without_streaming_is_an_error() {
        let opts = PathOptions {
            memory_budget_bytes: 8,
            allow_streaming: false,
        };
        let err = BrownianPath::new(1, 0, 2, 1.0, 0.25, &opts).unwrap_err();
        assert!(matches!(err, Error::MemoryBudget { .. }));
    }

    #[test]
    fn non_integral_grid_is_rejected() {
        assert!(matches!(make_path(1, 0, 1, 1.0, 0.3), Err(Error::Grid(_))));
        assert!(make_path(1, 0, 1, 0.0, 0.25).is_err());
    }

    #[test]
    fn coarse_at_fine_resolution_is_the_fine_increment() {
        let p = make_path(2, 1, 2, 1.0, 1.0 / 16.0).unwrap();
        for n in 0..16 {
            assert_eq!(
                p.coarse_increment(n, 1.0 / 16.0).unwrap(),
                p.fine_increment(n)
            );
        }
    }

    #[test]
    fn coarse_increments_telescope() {
        let p = make_path(3, 0, 2, 1.0, 1.0 / 256.0).unwrap();
        let mut total = vec![0.0; 2];
        p.accumulate(0, 256, &mut total);
        for h in [1.0 / 256.0, 1.0 / 16.0, 0.25, 1.0] {
            let steps = (1.0 / h) as u64;
            let mut sum = [0.0; 2];
            for n in 0..steps {
                for (s, v) in sum.iter_mut().zip(p.coarse_increment(n, h).unwrap()) {
                    *s += v;
                }
            }
            for (a, b) in sum.iter().zip(&total) {
                assert!((a - b).abs() <= 1e-13, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn misaligned_step_is_rejected() {
        let p = make_path(3, 0, 1, 1.0, 1.0 / 16.0).unwrap();
        assert!(matches!(p.coarse_increment(0, 0.1), Err(Error::Grid(_))));
        assert!(matches!(
            p.coarse_increment(4, 0.25),
            Err(Error::NoiseExhausted { .. })
        ));
    }

    #[test]
    fn sub_increment_partitions_the_step() {
        let p = make_path(4, 2, 3, 1.0, 1.0 / 128.0).unwrap();
        let ratio = 32;
        let mut dw_tau = vec![0.0; 3];
        let mut dw = vec![0.0; 3];
        for n in 0..4 {
            let q = p.split_increment_into(n, ratio, 0.37, &mut dw_tau, &mut dw);
            assert_eq!(q.fine_steps, 12);
            assert_eq!(q.tau * ratio as f64, q.fine_steps as f64);
            let mut coarse = vec![0.0; 3];
            p.coarse_increment_into(n, ratio, &mut coarse);
            assert_eq!(dw, coarse);
            let mut rest = vec![0.0; 3];
            p.accumulate(n * ratio + q.fine_steps, (n + 1) * ratio, &mut rest);
            for j in 0..3 {
                assert!((dw_tau[j] + rest[j] - coarse[j]).abs() < 1e-14);
            }
            let (tq, sub) = p.sub_increment(n, 0.25, 0.37).unwrap();
            assert_eq!(tq, q.tau);
            assert_eq!(sub, dw_tau);
        }
    }

    #[test]
    fn quantization_guard_and_clamping() {
        let p = make_path(4, 2, 1, 1.0, 1.0 / 64.0).unwrap();
        let err = p.sub_increment(0, 1.0 / 8.0, 0.5).unwrap_err();
        assert_eq!(err, Error::QuantizationGuard { ratio: 8, min: 16 });
        assert!(p.sub_increment_with_guard(0, 1.0 / 8.0, 0.5, 2).is_ok());
        assert!(p.sub_increment(0, 0.25, 0.0).is_err());
        assert_eq!(quantize_tau(1e-9, 16).fine_steps, 1);
        assert_eq!(quantize_tau(1.0 - 1e-9, 16).fine_steps, 15);
        for i in 1..1000 {
            let tau = i as f64 / 1000.0;
            let q = quantize_tau(tau, 16);
            assert!(
                (q.tau - tau).abs() <= 1.0 / 32.0 + 1e-15
                    || q.fine_steps == 1
                    || q.fine_steps == 15
            );
        }
    }

    #[test]
    fn mirrored_path_negates_exactly() {
        let p = make_path(8, 1, 2, 1.0, 1.0 / 32.0).unwrap();
        let m = p.mirrored();
        for k in 0..32 {
            let a = p.fine_increment(k);
            let b = m.fine_increment(k);
            assert_eq!(a[0], -b[0]);
            assert_eq!(a[1], -b[1]);
        }
        assert_eq!(
            m.coarse_increment(0, 0.5).unwrap()[0],
            -p.coarse_increment(0, 0.5).unwrap()[0]
        );
    }

    #[test]
    fn tau_stream_is_keyed_and_open() {
        let s = TauStream::new(11, 4);
        let again = TauStream::new(11, 4);
        let other = TauStream::reference(11, 4);
        for n in 1..200 {
            let t = draw_tau(&s, n);
            assert!(t > 0.0 && t < 1.0);
            assert_eq!(t, again.draw(n));
            assert_ne!(t, other.draw(n));
        }
    }

    #[test]
    #[should_panic]
    fn tau_index_zero_panics() {
        TauStream::new(1, 1).draw(0);
    }

    #[test]
    fn purposes_do_not_share_counters() {
        let a = StreamKey::new(1, 5, Purpose::Brownian).block(0);
        let b = StreamKey::new(1, 5, Purpose::Tau).block(0);
        let c = StreamKey::new(1, 6, Purpose::Brownian).block(0);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }
}
