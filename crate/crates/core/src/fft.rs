//! Complex FFTs for the spectral kernels.
//!
//! Power-of-two lengths use an iterative radix-2 transform with a precomputed
//! twiddle table; every other length goes through Bluestein's chirp-z
//! algorithm on top of a power-of-two plan. Transforms are unnormalized in
//! both directions.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `X(k) = sum_j x(j) exp(-2 pi i jk/n)`
    Forward,
    /// `x(j) = sum_k X(k) exp(+2 pi i jk/n)`
    Inverse,
}

#[derive(Debug, Clone)]
enum Algorithm {
    Radix2 {
        twiddles: Vec<Complex64>,
        bitrev: Vec<u32>,
    },
    Bluestein {
        m: usize,
        chirp: Vec<Complex64>,
        kernel_fft: Vec<Complex64>,
        inner: Box<Fft>,
    },
}

/// A reusable 1-D plan of fixed length.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    algo: Algorithm,
}

impl Fft {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "fft length must be positive");
        if n.is_power_of_two() {
            let twiddles = (0..n / 2)
                .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
                .collect();
            let bits = n.trailing_zeros();
            let bitrev = (0..n as u32)
                .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
                .collect();
            Fft { n, algo: Algorithm::Radix2 { twiddles, bitrev } }
        } else {
            let m = (2 * n - 1).next_power_of_two();
            // chirp w_j = exp(-i pi j^2 / n); j^2 reduced mod 2n keeps the phase exact
            let chirp: Vec<Complex64> = (0..n)
                .map(|j| {
                    let jj = (j as u128 * j as u128 % (2 * n as u128)) as f64;
                    Complex64::from_polar(1.0, -PI * jj / n as f64)
                })
                .collect();
            let inner = Fft::new(m);
            let mut kernel = vec![Complex64::new(0.0, 0.0); m];
            kernel[0] = chirp[0].conj();
            for j in 1..n {
                kernel[j] = chirp[j].conj();
                kernel[m - j] = chirp[j].conj();
            }
            inner.process(&mut kernel, Direction::Forward);
            Fft {
                n,
                algo: Algorithm::Bluestein { m, chirp, kernel_fft: kernel, inner: Box::new(inner) },
            }
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place transform of `buf` (length must equal the plan length).
    pub fn process(&self, buf: &mut [Complex64], dir: Direction) {
        assert_eq!(buf.len(), self.n, "buffer length does not match plan");
        match &self.algo {
            Algorithm::Radix2 { twiddles, bitrev } => radix2(buf, twiddles, bitrev, dir),
            Algorithm::Bluestein { m, chirp, kernel_fft, inner } => {
                bluestein(buf, *m, chirp, kernel_fft, inner, dir)
            }
        }
    }
}

fn radix2(buf: &mut [Complex64], twiddles: &[Complex64], bitrev: &[u32], dir: Direction) {
    let n = buf.len();
    for i in 0..n {
        let j = bitrev[i] as usize;
        if j > i {
            buf.swap(i, j);
        }
    }
    let inverse = dir == Direction::Inverse;
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            let (lo, hi) = buf[start..start + len].split_at_mut(half);
            for j in 0..half {
                let w = twiddles[j * stride];
                let w = if inverse { w.conj() } else { w };
                let t = hi[j] * w;
                let a = lo[j];
                lo[j] = a + t;
                hi[j] = a - t;
            }
        }
        len <<= 1;
    }
}

fn bluestein(
    buf: &mut [Complex64],
    m: usize,
    chirp: &[Complex64],
    kernel_fft: &[Complex64],
    inner: &Fft,
    dir: Direction,
) {
    let n = buf.len();
    // inverse(x) = conj(forward(conj(x)))
    let inverse = dir == Direction::Inverse;
    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for j in 0..n {
        let x = if inverse { buf[j].conj() } else { buf[j] };
        a[j] = x * chirp[j];
    }
    inner.process(&mut a, Direction::Forward);
    for (x, &k) in a.iter_mut().zip(kernel_fft) {
        *x *= k;
    }
    inner.process(&mut a, Direction::Inverse);
    let scale = 1.0 / m as f64;
    for j in 0..n {
        let y = a[j] * chirp[j] * scale;
        buf[j] = if inverse { y.conj() } else { y };
    }
}

/// Row-major `n x n` two-dimensional transform built from one 1-D plan.
#[derive(Debug, Clone)]
pub struct Fft2 {
    n: usize,
    plan: Fft,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        Fft2 { n, plan: Fft::new(n) }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Transforms `data` (length `n*n`, row-major) in place; `scratch` must
    /// have the same length.
    pub fn process(&self, data: &mut [Complex64], scratch: &mut [Complex64], dir: Direction) {
        let n = self.n;
        assert_eq!(data.len(), n * n);
        assert_eq!(scratch.len(), n * n);
        for row in data.chunks_exact_mut(n) {
            self.plan.process(row, dir);
        }
        transpose(data, scratch, n);
        for row in scratch.chunks_exact_mut(n) {
            self.plan.process(row, dir);
        }
        transpose(scratch, data, n);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 16;
    for ib in (0..n).step_by(B) {
        for jb in (0..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                for j in jb..(jb + B).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[Complex64], dir: Direction) -> Vec<Complex64> {
        let n = x.len();
        let sign = if dir == Direction::Forward { -1.0 } else { 1.0 };
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let ph = sign * 2.0 * PI * ((j * k) % n) as f64 / n as f64;
                        v * Complex64::from_polar(1.0, ph)
                    })
                    .sum()
            })
            .collect()
    }

    fn signal(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|j| {
                let t = j as f64;
                Complex64::new((0.37 * t).sin() + 0.1 * t, (1.3 * t).cos() - 0.02 * t * t)
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_for_assorted_lengths() {
        for &n in &[1usize, 2, 3, 5, 6, 8, 12, 16, 17, 24, 48, 64, 100] {
            for dir in [Direction::Forward, Direction::Inverse] {
                let x = signal(n);
                let want = naive(&x, dir);
                let mut got = x.clone();
                Fft::new(n).process(&mut got, dir);
                let scale = want.iter().map(|v| v.norm()).fold(1.0, f64::max);
                for (a, b) in got.iter().zip(&want) {
                    assert!((a - b).norm() < 1e-11 * scale, "n={n} {dir:?}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn two_dimensional_round_trip() {
        for &n in &[8usize, 12, 16] {
            let orig: Vec<Complex64> = signal(n * n);
            let mut data = orig.clone();
            let mut scratch = vec![Complex64::new(0.0, 0.0); n * n];
            let plan = Fft2::new(n);
            plan.process(&mut data, &mut scratch, Direction::Forward);
            plan.process(&mut data, &mut scratch, Direction::Inverse);
            let nn = (n * n) as f64;
            for (a, b) in data.iter().zip(&orig) {
                assert!((a / nn - b).norm() < 1e-12 * (1.0 + b.norm()));
            }
        }
    }
}
