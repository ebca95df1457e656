//! Adaptive quadrature: Gauss–Kronrod (7, 15) in one dimension and the
//! Genz–Malik degree-7/5 embedded cubature on boxes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Target accuracy: stop once `error <= max(abs, rel·|value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    /// Function-evaluation budget before giving up.
    pub max_evals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel, max_evals: 2_000_000 }
    }

    pub fn rel(rel: f64) -> Self {
        Self::new(0.0, rel)
    }

    fn met(&self, value: f64, error: f64) -> bool {
        error <= self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(Error::NonFiniteIntegrand);
    }
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    let mut fv = [(0.0, 0.0); 7];
    for (j, slot) in fv.iter_mut().enumerate() {
        let dx = h * XGK[j];
        let (f1, f2) = (f(c - dx), f(c + dx));
        if !f1.is_finite() || !f2.is_finite() {
            return Err(Error::NonFiniteIntegrand);
        }
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
        *slot = (f1, f2);
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for (j, &(f1, f2)) in fv.iter().enumerate() {
        resasc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = resk * h;
    resasc *= h.abs();
    let mut error = ((resk - resg) * h).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (1.0f64).min((200.0 * error / resasc).powf(1.5));
    }
    let resabs: f64 = h.abs() * (WGK[7] * fc.abs() + fv.iter().enumerate().map(|(j, &(f1, f2))| WGK[j] * (f1.abs() + f2.abs())).sum::<f64>());
    let floor = 50.0 * f64::EPSILON * resabs;
    if floor > error {
        error = floor;
    }
    Ok(Segment { a, b, value, error })
}

/// Adaptive Gauss–Kronrod integration of `f` over a finite interval.
pub fn integrate_1d<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadResult> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::OutOfDomain("integration limits must be finite".into()));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let mut heap = BinaryHeap::new();
    let first = gk15(&mut f, a, b)?;
    let mut value = first.value;
    let mut error = first.error;
    let mut evals = 15;
    heap.push(first);
    while !tol.met(value, error) {
        if evals + 30 > tol.max_evals {
            return Err(Error::MaxSubdivisions { estimate: value, error });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval too small to split further
            return Err(Error::MaxSubdivisions { estimate: value, error });
        }
        let left = gk15(&mut f, worst.a, mid)?;
        let right = gk15(&mut f, mid, worst.b)?;
        evals += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if heap.len() % 64 == 0 {
            // resynchronise running sums against drift
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
        }
    }
    let value = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.error).sum();
    Ok(QuadResult { value, error, evaluations: evals })
}

const L2: f64 = 0.358_568_582_800_318_1; // sqrt(9/70)
const L3: f64 = 0.948_683_298_050_513_8; // sqrt(9/10)
const L5: f64 = 0.688_247_201_611_685_3; // sqrt(9/19)

struct Cell {
    center: Vec<f64>,
    half: Vec<f64>,
    value: f64,
    error: f64,
    split: usize,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn genz_malik<F: FnMut(&[f64]) -> f64>(f: &mut F, center: Vec<f64>, half: Vec<f64>) -> Result<(Cell, usize)> {
    let n = center.len();
    let nf = n as f64;
    let vol: f64 = half.iter().map(|h| 2.0 * h).product();
    let mut x = center.clone();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> Result<f64> {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteIntegrand)
        }
    };
    let f0 = eval(&x, &mut evals)?;
    let mut s2 = 0.0;
    let mut s3 = 0.0;
    let mut best = (0usize, -1.0f64);
    for i in 0..n {
        x[i] = center[i] + L2 * half[i];
        let a = eval(&x, &mut evals)?;
        x[i] = center[i] - L2 * half[i];
        let b = eval(&x, &mut evals)?;
        x[i] = center[i] + L3 * half[i];
        let c = eval(&x, &mut evals)?;
        x[i] = center[i] - L3 * half[i];
        let d = eval(&x, &mut evals)?;
        x[i] = center[i];
        s2 += a + b;
        s3 += c + d;
        let diff = ((a + b - 2.0 * f0) - (L2 * L2 / (L3 * L3)) * (c + d - 2.0 * f0)).abs();
        if diff > best.1 {
            best = (i, diff);
        }
    }
    let mut s4 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                x[i] = center[i] + si * L3 * half[i];
                x[j] = center[j] + sj * L3 * half[j];
                s4 += eval(&x, &mut evals)?;
            }
            x[i] = center[i];
            x[j] = center[j];
        }
    }
    let mut s5 = 0.0;
    for mask in 0..(1usize << n) {
        for i in 0..n {
            let s = if mask & (1 << i) != 0 { 1.0 } else { -1.0 };
            x[i] = center[i] + s * L5 * half[i];
        }
        s5 += eval(&x, &mut evals)?;
    }
    let w1 = (12824.0 - 9120.0 * nf + 400.0 * nf * nf) / 19683.0;
    let w2 = 980.0 / 6561.0;
    let w3 = (1820.0 - 400.0 * nf) / 19683.0;
    let w4 = 200.0 / 19683.0;
    let w5 = 6859.0 / 19683.0 / (1u64 << n) as f64;
    let p1 = (729.0 - 950.0 * nf + 50.0 * nf * nf) / 729.0;
    let p2 = 245.0 / 486.0;
    let p3 = (265.0 - 100.0 * nf) / 1458.0;
    let p4 = 25.0 / 729.0;
    let deg7 = vol * (w1 * f0 + w2 * s2 + w3 * s3 + w4 * s4 + w5 * s5);
    let deg5 = vol * (p1 * f0 + p2 * s2 + p3 * s3 + p4 * s4);
    Ok((
        Cell { center, half, value: deg7, error: (deg7 - deg5).abs(), split: best.0 },
        evals,
    ))
}

/// Adaptive integration over the box `[lower, upper]` in up to three
/// dimensions.
pub fn integrate_box<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    lower: &[f64],
    upper: &[f64],
    tol: Tolerance,
) -> Result<QuadResult> {
    let n = lower.len();
    if upper.len() != n {
        return Err(Error::ShapeMismatch("box limits differ in length".into()));
    }
    if n == 0 {
        return Ok(QuadResult { value: f(&[]), error: 0.0, evaluations: 1 });
    }
    if n > 3 {
        return Err(Error::DimensionTooLarge { dim: n, max: 3 });
    }
    if lower.iter().chain(upper).any(|x| !x.is_finite()) {
        return Err(Error::OutOfDomain("integration limits must be finite".into()));
    }
    if n == 1 {
        return integrate_1d(|x| f(&[x]), lower[0], upper[0], tol);
    }
    let center: Vec<f64> = lower.iter().zip(upper).map(|(a, b)| 0.5 * (a + b)).collect();
    let half: Vec<f64> = lower.iter().zip(upper).map(|(a, b)| 0.5 * (b - a)).collect();
    if half.iter().any(|h| *h == 0.0) {
        return Ok(QuadResult { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let (first, mut evals) = genz_malik(&mut f, center, half)?;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    while !tol.met(value, error) {
        if evals > tol.max_evals {
            return Err(Error::MaxSubdivisions { estimate: value, error });
        }
        let worst = heap.pop().expect("heap never empties");
        let d = worst.split;
        let mut half = worst.half.clone();
        half[d] *= 0.5;
        let mut c1 = worst.center.clone();
        let mut c2 = worst.center.clone();
        c1[d] -= half[d];
        c2[d] += half[d];
        let (a, ea) = genz_malik(&mut f, c1, half.clone())?;
        let (b, eb) = genz_malik(&mut f, c2, half)?;
        evals += ea + eb;
        value += a.value + b.value - worst.value;
        error += a.error + b.error - worst.error;
        heap.push(a);
        heap.push(b);
        if heap.len() % 64 == 0 {
            value = heap.iter().map(|c| c.value).sum();
            error = heap.iter().map(|c| c.error).sum();
        }
    }
    let value = heap.iter().map(|c| c.value).sum();
    let error = heap.iter().map(|c| c.error).sum();
    Ok(QuadResult { value, error, evaluations: evals })
}
