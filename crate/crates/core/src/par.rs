//! Per-point map over a grid buffer, parallel when the `parallel` feature is on.

#[cfg(feature = "parallel")]
pub fn fill<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    use rayon::prelude::*;
    out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
}

#[cfg(not(feature = "parallel"))]
pub fn fill<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i);
    }
}
