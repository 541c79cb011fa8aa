//! Grid-bracketed golden-section maximization of a scalar function.

/// `(√5 - 1) / 2`
const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_ITERS: usize = 600;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct GridGolden {
    pub grid_points: usize,
    /// Stop once the bracket is narrower than this.
    pub abs_tol: f64,
    /// ... and narrower than this fraction of its largest endpoint.
    pub rel_tol: f64,
}

impl Default for GridGolden {
    fn default() -> Self {
        Self { grid_points: 4096, abs_tol: 1e-12, rel_tol: 1e-12 }
    }
}

impl GridGolden {
    /// Maximizes `f` on `[lo, hi]`: best grid point, then golden section on its neighbouring cells.
    pub fn maximize<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> Maximum {
        assert!(hi > lo && self.grid_points >= 3);
        let n = self.grid_points;
        let step = (hi - lo) / (n - 1) as f64;
        let at = |k: usize| if k == n - 1 { hi } else { lo + k as f64 * step };
        let mut best = Maximum { x: lo, value: f(lo) };
        let mut best_k = 0;
        for k in 1..n {
            let x = at(k);
            let v = f(x);
            if v > best.value {
                best = Maximum { x, value: v };
                best_k = k;
            }
        }
        let a = at(best_k.saturating_sub(1));
        let b = at((best_k + 1).min(n - 1));
        let refined = self.golden(&f, a, b);
        if refined.value >= best.value {
            refined
        } else {
            best
        }
    }

    /// Golden-section search on `[a, b]`, assuming `f` is unimodal there.
    pub fn golden<F: Fn(f64) -> f64>(&self, f: &F, mut a: f64, mut b: f64) -> Maximum {
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..MAX_ITERS {
            let width = b - a;
            let scale = a.abs().max(b.abs());
            if width <= self.abs_tol && width <= self.rel_tol * scale {
                break;
            }
            let (old_a, old_b) = (a, b);
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = f(d);
            }
            if a == old_a && b == old_b {
                break;
            }
        }
        [a, c, d, b]
            .into_iter()
            .map(|x| Maximum { x, value: f(x) })
            .fold(Maximum { x: a, value: f64::NEG_INFINITY }, |m, p| if p.value > m.value { p } else { m })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_maximum() {
        let m = GridGolden::default().maximize(|x| -(x - 0.3).powi(2) + 2.0, 0.0, 1.0);
        assert!((m.x - 0.3).abs() < 1e-7);
        assert!((m.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn endpoint_maximum() {
        let m = GridGolden::default().maximize(|x| x.sin(), 0.0, 1.0);
        assert!((m.x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tiny_maximizer_resolved_relatively() {
        // peak at 1e-15, far below the grid spacing
        let m = GridGolden::default().maximize(|x| -(x * 1e15 - 1.0).powi(2), 0.0, 1.0);
        assert!((m.x - 1e-15).abs() < 1e-22, "{}", m.x);
    }

    #[test]
    fn picks_global_of_two_bumps() {
        let f = |x: f64| (-(x - 0.2).powi(2) * 400.0).exp() + 1.5 * (-(x - 0.8).powi(2) * 400.0).exp();
        let m = GridGolden::default().maximize(f, 0.0, 1.0);
        assert!((m.x - 0.8).abs() < 1e-3);
    }
}
