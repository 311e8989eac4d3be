//! FFT plan cache and spectral helpers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

#[derive(Clone)]
pub struct FftPair {
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
}

impl FftPair {
    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }
}

type PlanCache = (FftPlanner<f64>, HashMap<usize, FftPair>);

/// Returns cached forward/inverse plans for size `n`.
pub fn plans(n: usize) -> FftPair {
    static CACHE: OnceLock<Mutex<PlanCache>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    let (planner, map) = &mut *guard;
    if let Some(p) = map.get(&n) {
        return p.clone();
    }
    let pair = FftPair {
        forward: planner.plan_fft_forward(n),
        inverse: planner.plan_fft_inverse(n),
    };
    map.insert(n, pair.clone());
    pair
}

/// Multiplies the spectrum of `data` by `phase(p)` (momenta in FFT order)
/// and transforms back. Normalisation is applied.
pub fn apply_in_momentum(grid: &Grid, data: &mut [Complex64], phase: impl Fn(f64) -> Complex64) {
    let fft = plans(grid.len());
    fft.forward.process(data);
    let scale = 1.0 / grid.len() as f64;
    for (c, p) in data.iter_mut().zip(grid.fft_momenta()) {
        *c *= phase(p) * scale;
    }
    fft.inverse.process(data);
}

/// Band-limited translation: returns samples of `f(x - shift)`.
pub fn translate(grid: &Grid, data: &mut [Complex64], shift: f64) {
    if shift == 0.0 {
        return;
    }
    apply_in_momentum(grid, data, |p| Complex64::from_polar(1.0, -p * shift));
}
