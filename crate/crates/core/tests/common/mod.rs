// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Reference implementations written from the model definition alone, with
//! no calls into the crate. Slow and simple on purpose.

#![allow(dead_code)]

use num_complex::Complex64 as C;

/// Row-major dense complex matrix.
#[derive(Clone, Debug)]
pub struct M {
    pub n: usize,
    pub a: Vec<C>,
}

impl M {
    pub fn zeros(n: usize) -> Self {
        M { n, a: vec![C::new(0.0, 0.0); n * n] }
    }
    pub fn at(&self, i: usize, j: usize) -> C {
        self.a[i * self.n + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: C) {
        self.a[i * self.n + j] = v;
    }
    pub fn mul(&self, o: &M) -> M {
        let n = self.n;
        let mut r = M::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = self.at(i, k);
                if x == C::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    r.a[i * n + j] += x * o.at(k, j);
                }
            }
        }
        r
    }
    pub fn axpy(&self, s: C, o: &M) -> M {
        M {
            n: self.n,
            a: self.a.iter().zip(&o.a).map(|(x, y)| x + s * y).collect(),
        }
    }
    pub fn trace(&self) -> C {
        (0..self.n).map(|i| self.at(i, i)).sum()
    }
}

/// Chain+sink model: sink at index 0, chain sites 1..=N, site N attached to the sink.
#[derive(Clone, Copy, Debug)]
pub struct Model {
    pub n: usize,
    pub omega: f64,
    pub e0: f64,
    pub gamma: f64,
    pub gphi: f64,
}

impl Model {
    pub fn hamiltonian(&self) -> M {
        let d = self.n + 1;
        let mut h = M::zeros(d);
        for j in 1..=self.n {
            h.set(j, j, C::new(self.e0 * j as f64, 0.0));
            if j < self.n {
                h.set(j, j + 1, C::new(-self.omega, 0.0));
                h.set(j + 1, j, C::new(-self.omega, 0.0));
            }
        }
        h
    }

    /// Lindblad right-hand side written out channel by channel.
    pub fn rhs(&self, h: &M, rho: &M) -> M {
        let d = rho.n;
        let i = C::new(0.0, 1.0);
        let comm = h.mul(rho).axpy(C::new(-1.0, 0.0), &rho.mul(h));
        let mut out = M::zeros(d);
        for k in 0..d * d {
            out.a[k] = -i * comm.a[k];
        }
        let nn = self.n;
        // Sink: ρ_NN flows into ρ_00; coherences with N decay at γ/2.
        let g = self.gamma;
        out.a[0] += g * rho.at(nn, nn);
        for k in 0..d {
            out.a[nn * d + k] -= 0.5 * g * rho.at(nn, k);
            out.a[k * d + nn] -= 0.5 * g * rho.at(k, nn);
        }
        // Dephasing kills chain coherences at rate γφ.
        for a in 1..d {
            for b in 1..d {
                if a != b {
                    out.a[a * d + b] -= self.gphi * rho.at(a, b);
                }
            }
        }
        for a in 1..d {
            out.a[a * d] -= 0.5 * self.gphi * rho.at(a, 0);
            out.a[a] -= 0.5 * self.gphi * rho.at(0, a);
        }
        out
    }

    /// ρ(0) = |ψ⟩⟨ψ| on the chain.
    pub fn initial(&self, psi: &[C]) -> M {
        let d = self.n + 1;
        let mut r = M::zeros(d);
        for a in 0..self.n {
            for b in 0..self.n {
                r.set(a + 1, b + 1, psi[a] * psi[b].conj());
            }
        }
        r
    }

    /// Classic RK4 with fixed step; returns ρ at each multiple of `every` steps.
    pub fn rk4(&self, psi: &[C], dt: f64, steps: usize, every: usize) -> Vec<(f64, M)> {
        let h = self.hamiltonian();
        let mut rho = self.initial(psi);
        let mut out = vec![(0.0, rho.clone())];
        let c = |x: f64| C::new(x, 0.0);
        for s in 1..=steps {
            let k1 = self.rhs(&h, &rho);
            let k2 = self.rhs(&h, &rho.axpy(c(dt / 2.0), &k1));
            let k3 = self.rhs(&h, &rho.axpy(c(dt / 2.0), &k2));
            let k4 = self.rhs(&h, &rho.axpy(c(dt), &k3));
            for k in 0..rho.a.len() {
                rho.a[k] += dt / 6.0 * (k1.a[k] + 2.0 * k2.a[k] + 2.0 * k3.a[k] + k4.a[k]);
            }
            if s % every == 0 {
                out.push((s as f64 * dt, rho.clone()));
            }
        }
        out
    }

    /// τ = ∫ (1 − P_sink) dt by RK4 with Simpson quadrature, stopped once
    /// the chain population falls below `tail`.
    pub fn tau_rk4(&self, psi: &[C], dt: f64, tail: f64) -> f64 {
        let h = self.hamiltonian();
        let mut rho = self.initial(psi);
        let c = |x: f64| C::new(x, 0.0);
        let mut samples = vec![1.0];
        loop {
            for _ in 0..2 {
                let k1 = self.rhs(&h, &rho);
                let k2 = self.rhs(&h, &rho.axpy(c(dt / 2.0), &k1));
                let k3 = self.rhs(&h, &rho.axpy(c(dt / 2.0), &k2));
                let k4 = self.rhs(&h, &rho.axpy(c(dt), &k3));
                for k in 0..rho.a.len() {
                    rho.a[k] += dt / 6.0 * (k1.a[k] + 2.0 * k2.a[k] + 2.0 * k3.a[k] + k4.a[k]);
                }
                samples.push(1.0 - rho.at(0, 0).re);
            }
            if *samples.last().unwrap() < tail {
                break;
            }
            assert!(samples.len() < 20_000_000, "oracle did not converge");
        }
        let mut s = 0.0;
        for w in samples.windows(3).step_by(2) {
            s += dt / 3.0 * (w[0] + 4.0 * w[1] + w[2]);
        }
        s
    }
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Exact τ for |n⟩ at zero field and dephasing.
pub fn tau_localized(n: usize, nn: usize, gamma: f64, omega: f64) -> f64 {
    let (n, nn) = (n as f64, nn as f64);
    n * (nn - n + 1.0) / gamma + gamma * n * (nn - n) / (4.0 * omega * omega)
}

/// Weak-coupling τ for |n⟩.
pub fn tau_weak(n: usize, nn: usize, gamma: f64) -> f64 {
    (n * (nn - n + 1)) as f64 / gamma
}

/// Unit Gaussian over sites 1..=N, exp(−(x−c)²/(4w²)).
pub fn gaussian(nn: usize, c: f64, w: f64) -> Vec<C> {
    let v: Vec<f64> = (1..=nn).map(|x| (-(x as f64 - c).powi(2) / (4.0 * w * w)).exp()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| C::new(x / norm, 0.0)).collect()
}

pub fn localized(n: usize, nn: usize) -> Vec<C> {
    let mut v = vec![C::new(0.0, 0.0); nn];
    v[n - 1] = C::new(1.0, 0.0);
    v
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
