//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the loops below run on the rayon pool.
//! Reductions are always split into fixed [`CHUNK`]-sized partial sums that
//! are combined in index order, so the serial and parallel paths produce the
//! same bits.

use crate::C64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length for fan-out and for partial sums.
pub const CHUNK: usize = 4096;

/// Fills `out[i] = f(i)`.
pub fn fill<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            let base = c * CHUNK;
            for (j, o) in chunk.iter_mut().enumerate() {
                *o = f(base + j);
            }
        });
    }
    #[cfg(not(feature = "parallel"))]
    fill_serial(out, f);
}

/// Sequential version of [`fill`], always available.
pub fn fill_serial<T, F>(out: &mut [T], f: F)
where
    F: Fn(usize) -> T,
{
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i);
    }
}

fn chunk_sums<F>(len: usize, f: F) -> Vec<C64>
where
    F: Fn(std::ops::Range<usize>) -> C64 + Sync + Send,
{
    let n_chunks = len.div_ceil(CHUNK);
    let range = |c: usize| c * CHUNK..((c + 1) * CHUNK).min(len);
    #[cfg(feature = "parallel")]
    {
        if n_chunks > 1 {
            return (0..n_chunks).into_par_iter().map(|c| f(range(c))).collect();
        }
    }
    (0..n_chunks).map(|c| f(range(c))).collect()
}

fn combine(parts: Vec<C64>) -> C64 {
    parts.into_iter().fold(C64::new(0.0, 0.0), |acc, p| acc + p)
}

/// Σ_i f(i) over 0..len with the fixed chunked summation order.
pub fn sum_indexed<F>(len: usize, f: F) -> C64
where
    F: Fn(usize) -> C64 + Sync + Send,
{
    combine(chunk_sums(len, |r| r.fold(C64::new(0.0, 0.0), |acc, i| acc + f(i))))
}

/// Hermitian inner product ⟨a|b⟩ = Σ conj(a_i) b_i.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len());
    combine(chunk_sums(a.len(), |r| {
        a[r.clone()]
            .iter()
            .zip(&b[r])
            .fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
    }))
}

/// Squared Euclidean norm.
pub fn norm_sqr(a: &[C64]) -> f64 {
    combine(chunk_sums(a.len(), |r| {
        C64::new(a[r].iter().map(|x| x.norm_sqr()).sum::<f64>(), 0.0)
    }))
    .re
}

pub fn norm(a: &[C64]) -> f64 {
    norm_sqr(a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(y: &mut [C64], alpha: C64, x: &[C64]) {
    assert_eq!(y.len(), x.len());
    #[cfg(feature = "parallel")]
    {
        y.par_chunks_mut(CHUNK)
            .zip(x.par_chunks(CHUNK))
            .for_each(|(yc, xc)| yc.iter_mut().zip(xc).for_each(|(yi, xi)| *yi += alpha * xi));
    }
    #[cfg(not(feature = "parallel"))]
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

pub fn scale(y: &mut [C64], alpha: C64) {
    #[cfg(feature = "parallel")]
    y.par_chunks_mut(CHUNK)
        .for_each(|c| c.iter_mut().for_each(|v| *v *= alpha));
    #[cfg(not(feature = "parallel"))]
    y.iter_mut().for_each(|v| *v *= alpha);
}

/// Maps independent work items, preserving input order in the output.
pub fn map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Runs `f` inside a pool limited to `threads` workers (0 = default pool).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if threads > 0 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
                return pool.install(f);
            }
        }
        f()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}
