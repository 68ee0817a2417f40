//! Spectral differential operators and Lie derivatives on the torus.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::Real;

use super::{Grid, ScalarField, Spectrum, VectorField};

/// Multiplies a Fourier coefficient by `i k`.
#[inline]
fn ik<T: Real>(k: T, c: Complex<T>) -> Complex<T> {
    Complex::new(-k * c.im, k * c.re)
}

#[inline]
fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// Absolute divergence tolerance for a field of magnitude `scale`.
pub(crate) fn div_tolerance<T: Real>(base: f64, scale: T) -> f64 {
    base.max(1e4 * T::eps_f64()) * scale.as_f64().max(1.0)
}

impl<T: Real> Grid<T> {
    fn empty_spectrum(&self) -> Spectrum<T> {
        vec![czero(); self.spec().len()]
    }

    pub(crate) fn curl_spectra(&self, s: &[Spectrum<T>; 3], truncate: bool) -> [Spectrum<T>; 3] {
        let [kx, ky, kz] = self.kd();
        let mut out = [self.empty_spectrum(), self.empty_spectrum(), self.empty_spectrum()];
        for idx in 0..self.spec().len() {
            if truncate && !self.dealias_keep(idx) {
                continue;
            }
            let (fx, fy, fz) = (s[0][idx], s[1][idx], s[2][idx]);
            out[0][idx] = ik(ky[idx], fz) - ik(kz[idx], fy);
            out[1][idx] = ik(kz[idx], fx) - ik(kx[idx], fz);
            out[2][idx] = ik(kx[idx], fy) - ik(ky[idx], fx);
        }
        out
    }

    pub fn curl(&self, f: &VectorField<T>) -> VectorField<T> {
        let s = self.forward_vec(f);
        self.inverse_vec(self.curl_spectra(&s, false))
    }

    /// Curl of two fields for the price of one packed transform set.
    pub(crate) fn curl_pair(
        &self,
        a: &VectorField<T>,
        b: &VectorField<T>,
        truncate: bool,
    ) -> (VectorField<T>, VectorField<T>) {
        let mut s = self
            .forward_real(&[&a.x, &a.y, &a.z, &b.x, &b.y, &b.z])
            .into_iter();
        let mut next = || s.next().unwrap();
        let sa = [next(), next(), next()];
        let sb = [next(), next(), next()];
        self.inverse_vec_pair(self.curl_spectra(&sa, truncate), self.curl_spectra(&sb, truncate))
    }

    /// Curl of a pointwise product, with the product truncated by the 2/3 rule
    /// when the grid dealiases.
    pub fn curl_of_product(&self, f: &VectorField<T>) -> VectorField<T> {
        let s = self.forward_vec(f);
        self.inverse_vec(self.curl_spectra(&s, true))
    }

    fn div_spectrum(&self, s: &[Spectrum<T>; 3], truncate: bool) -> Spectrum<T> {
        let [kx, ky, kz] = self.kd();
        let mut out = self.empty_spectrum();
        for (idx, o) in out.iter_mut().enumerate() {
            if truncate && !self.dealias_keep(idx) {
                continue;
            }
            *o = ik(kx[idx], s[0][idx]) + ik(ky[idx], s[1][idx]) + ik(kz[idx], s[2][idx]);
        }
        out
    }

    pub fn div(&self, f: &VectorField<T>) -> ScalarField<T> {
        let s = self.forward_vec(f);
        self.inverse_real(vec![self.div_spectrum(&s, false)]).pop().unwrap()
    }

    pub fn max_div(&self, f: &VectorField<T>) -> T {
        self.div(f).max_abs()
    }

    fn grad_spectra(&self, s: &Spectrum<T>, truncate: bool) -> [Spectrum<T>; 3] {
        let kd = self.kd();
        let mut out = [self.empty_spectrum(), self.empty_spectrum(), self.empty_spectrum()];
        for idx in 0..self.spec().len() {
            if truncate && !self.dealias_keep(idx) {
                continue;
            }
            for a in 0..3 {
                out[a][idx] = ik(kd[a][idx], s[idx]);
            }
        }
        out
    }

    pub fn grad(&self, f: &ScalarField<T>) -> VectorField<T> {
        let s = self.forward_real(&[f]).pop().unwrap();
        self.inverse_vec(self.grad_spectra(&s, false))
    }

    /// Gradients of each component: `g[j] = ∇F_j`, so `g[j].k = ∂_k F_j`.
    pub fn gradient_tensor(&self, f: &VectorField<T>) -> [VectorField<T>; 3] {
        let s = self.forward_vec(f);
        let kd = self.kd();
        let mut spectra = Vec::with_capacity(9);
        for sj in &s {
            for kda in kd {
                spectra.push(sj.iter().zip(kda).map(|(&c, &k)| ik(k, c)).collect());
            }
        }
        let mut it = self.inverse_real(spectra).into_iter();
        let mut next = || {
            VectorField::from_components(it.next().unwrap(), it.next().unwrap(), it.next().unwrap())
        };
        [next(), next(), next()]
    }

    pub fn laplacian(&self, f: &ScalarField<T>) -> ScalarField<T> {
        let mut s = self.forward_real(&[f]).pop().unwrap();
        for (c, &k2) in s.iter_mut().zip(self.k2()) {
            *c = *c * (-k2);
        }
        self.inverse_real(vec![s]).pop().unwrap()
    }

    pub fn vector_laplacian(&self, f: &VectorField<T>) -> VectorField<T> {
        let mut s = self.forward_vec(f);
        for comp in s.iter_mut() {
            for (c, &k2) in comp.iter_mut().zip(self.k2()) {
                *c = *c * (-k2);
            }
        }
        self.inverse_vec(s)
    }

    fn mask(&self, s: &mut Spectrum<T>) {
        for (idx, c) in s.iter_mut().enumerate() {
            if !self.dealias_keep(idx) {
                *c = czero();
            }
        }
    }

    /// 2/3-rule spectral truncation; identity when the grid does not dealias.
    pub fn truncate(&self, f: &ScalarField<T>) -> ScalarField<T> {
        if !self.spec().dealias {
            return f.clone();
        }
        let mut s = self.forward_real(&[f]);
        self.mask(&mut s[0]);
        self.inverse_real(s).pop().unwrap()
    }

    pub fn truncate_vec(&self, f: &VectorField<T>) -> VectorField<T> {
        if !self.spec().dealias {
            return f.clone();
        }
        let mut s = self.forward_vec(f);
        for c in s.iter_mut() {
            self.mask(c);
        }
        self.inverse_vec(s)
    }

    /// Dealiased pointwise cross product.
    pub fn cross(&self, a: &VectorField<T>, b: &VectorField<T>) -> VectorField<T> {
        self.truncate_vec(&a.cross_pointwise(b))
    }

    /// Dealiased pointwise dot product.
    pub fn dot(&self, a: &VectorField<T>, b: &VectorField<T>) -> ScalarField<T> {
        self.truncate(&a.dot_pointwise(b))
    }

    /// Dealiased pointwise product.
    pub fn mul(&self, a: &ScalarField<T>, b: &ScalarField<T>) -> ScalarField<T> {
        self.truncate(&a.mul_pointwise(b))
    }

    /// `∫ f d³x`
    pub fn integrate(&self, f: &ScalarField<T>) -> T {
        f.integrate()
    }

    /// `(a·∇)F` with the products truncated.
    pub fn directional_derivative(&self, a: &VectorField<T>, f: &VectorField<T>) -> VectorField<T> {
        let g = self.gradient_tensor(f);
        let spec = *self.spec();
        let raw = VectorField::from_index_fn(spec, |i| {
            let av = a.at(i);
            let mut out = [T::zero(); 3];
            for (j, gj) in g.iter().enumerate() {
                let d = gj.at(i);
                out[j] = av[0] * d[0] + av[1] * d[1] + av[2] * d[2];
            }
            out
        });
        self.truncate_vec(&raw)
    }

    fn require_divfree(&self, name: &str, f: &VectorField<T>, base: f64) -> Result<()> {
        let d = self.max_div(f);
        let tol = div_tolerance(base, f.max_abs());
        if !(d.as_f64() <= tol) {
            return Err(Error::constraint(format!("max|div {name}|"), d.as_f64(), tol));
        }
        Ok(())
    }

    /// Lie derivative of a flux 2-form, `𝓛_ξ D = [ξ, D] = −curl(ξ×D)`.
    ///
    /// Both arguments must be divergence-free: only then does the curl form
    /// agree with `(ξ·∇)D − (D·∇)ξ`.
    pub fn lie2form(&self, xi: &VectorField<T>, d: &VectorField<T>) -> Result<VectorField<T>> {
        self.check(xi.spec())?;
        self.check(d.spec())?;
        self.require_divfree("xi", xi, 1e-10)?;
        self.require_divfree("D", d, 1e-10)?;
        Ok(self.lie_transport_2form(xi, d))
    }

    /// `−curl(ξ×D)` without the divergence preconditions.
    pub fn lie_transport_2form(&self, xi: &VectorField<T>, d: &VectorField<T>) -> VectorField<T> {
        let prod = xi.cross_pointwise(d);
        let mut s = self.forward_vec(&prod);
        for c in s.iter_mut() {
            for v in c.iter_mut() {
                *v = -*v;
            }
        }
        self.inverse_vec(self.curl_spectra(&s, true))
    }

    /// `(−curl(ξ×A), −curl(ξ×B))` in one packed pass.
    pub(crate) fn lie_transport_2form_pair(
        &self,
        xi: &VectorField<T>,
        a: &VectorField<T>,
        b: &VectorField<T>,
    ) -> (VectorField<T>, VectorField<T>) {
        let pa = a.cross_pointwise(xi);
        let pb = b.cross_pointwise(xi);
        self.curl_pair(&pa, &pb, true)
    }

    /// Lie derivative of the 1-form `v·dx`: `∇(ξ·v) − ξ×curl v`.
    pub fn lie1form(&self, xi: &VectorField<T>, v: &VectorField<T>) -> VectorField<T> {
        let w = self.curl(v);
        let s = xi.dot_pointwise(v);
        let c = xi.cross_pointwise(&w);
        let mut spectra = self.forward_real(&[&s, &c.x, &c.y, &c.z]).into_iter();
        let ss = spectra.next().unwrap();
        let sc = [spectra.next().unwrap(), spectra.next().unwrap(), spectra.next().unwrap()];
        let kd = self.kd();
        let mut out = [self.empty_spectrum(), self.empty_spectrum(), self.empty_spectrum()];
        for idx in 0..self.spec().len() {
            if !self.dealias_keep(idx) {
                continue;
            }
            for a in 0..3 {
                out[a][idx] = ik(kd[a][idx], ss[idx]) - sc[a][idx];
            }
        }
        self.inverse_vec(out)
    }

    /// Lie derivative of the scalar density `h d³x`: `div(hξ)`.
    pub fn lie_scalar_density(&self, xi: &VectorField<T>, h: &ScalarField<T>) -> ScalarField<T> {
        let s = self.forward_vec(&xi.mul_scalar_pointwise(h));
        self.inverse_real(vec![self.div_spectrum(&s, true)]).pop().unwrap()
    }

    /// Lie derivative of the 1-form density `P·dx⊗d³x`:
    /// `∂_j(ξ^j P_k) + P_j ∂_k ξ^j`.
    pub fn lie_1form_density(&self, xi: &VectorField<T>, p: &VectorField<T>) -> VectorField<T> {
        let g = self.gradient_tensor(xi);
        self.lie_1form_density_with_grad(xi, &g, p)
    }

    /// As [`Grid::lie_1form_density`] with `∇ξ` supplied (`g[j] = ∇ξ^j`).
    pub fn lie_1form_density_with_grad(
        &self,
        xi: &VectorField<T>,
        grad_xi: &[VectorField<T>; 3],
        p: &VectorField<T>,
    ) -> VectorField<T> {
        let spec = *self.spec();
        let extra = VectorField::from_index_fn(spec, |i| {
            let pv = p.at(i);
            let g0 = grad_xi[0].at(i);
            let g1 = grad_xi[1].at(i);
            let g2 = grad_xi[2].at(i);
            [
                pv[0] * g0[0] + pv[1] * g1[0] + pv[2] * g2[0],
                pv[0] * g0[1] + pv[1] * g1[1] + pv[2] * g2[1],
                pv[0] * g0[2] + pv[1] * g1[2] + pv[2] * g2[2],
            ]
        });
        let xs = xi.components();
        let ps = p.components();
        let mut fields = Vec::with_capacity(12);
        for xj in xs {
            for pk in ps {
                fields.push(xj.mul_pointwise(pk));
            }
        }
        let refs: Vec<&ScalarField<T>> = fields
            .iter()
            .chain([&extra.x, &extra.y, &extra.z])
            .collect();
        let map = [[0, 1, 2], [3, 4, 5], [6, 7, 8]];
        self.div_tensor_indexed(&refs, map, Some([9, 10, 11]), T::one())
    }

    /// `out_k = sign * Σ_j ∂_j T_jk + extra_k`, all products truncated. `T_jk`
    /// is `fields[map[j][k]]`.
    pub(crate) fn div_tensor_indexed(
        &self,
        fields: &[&ScalarField<T>],
        map: [[usize; 3]; 3],
        extra: Option<[usize; 3]>,
        sign: T,
    ) -> VectorField<T> {
        let s = self.forward_real(fields);
        let kd = self.kd();
        let mut out = [self.empty_spectrum(), self.empty_spectrum(), self.empty_spectrum()];
        for idx in 0..self.spec().len() {
            if !self.dealias_keep(idx) {
                continue;
            }
            for k in 0..3 {
                let mut acc = czero();
                for j in 0..3 {
                    acc = acc + ik(kd[j][idx], s[map[j][k]][idx]);
                }
                acc = acc * sign;
                if let Some(e) = extra {
                    acc = acc + s[e[k]][idx];
                }
                out[k][idx] = acc;
            }
        }
        self.inverse_vec(out)
    }

    /// `Σ_j ∂_j(a_j b_k)`, truncated.
    pub fn div_outer(&self, a: &VectorField<T>, b: &VectorField<T>) -> VectorField<T> {
        let mut fields = Vec::with_capacity(9);
        for aj in a.components() {
            for bk in b.components() {
                fields.push(aj.mul_pointwise(bk));
            }
        }
        let refs: Vec<&ScalarField<T>> = fields.iter().collect();
        self.div_tensor_indexed(&refs, [[0, 1, 2], [3, 4, 5], [6, 7, 8]], None, T::one())
    }

    /// Helmholtz projection onto divergence-free fields. The mean is kept.
    pub fn project_divfree(&self, f: &VectorField<T>) -> VectorField<T> {
        let mut s = self.forward_vec(f);
        let [kx, ky, kz] = self.kd();
        for idx in 0..self.spec().len() {
            let k = [kx[idx], ky[idx], kz[idx]];
            let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if kk == T::zero() {
                continue;
            }
            let kf = s[0][idx] * k[0] + s[1][idx] * k[1] + s[2][idx] * k[2];
            for a in 0..3 {
                s[a][idx] = s[a][idx] - kf * (k[a] / kk);
            }
        }
        self.inverse_vec(s)
    }

    /// Divergence-free vector potential `A` with `curl A = B`.
    ///
    /// Requires `div B = 0` (to 1e-8) and zero mean.
    pub fn curl_inv(&self, b: &VectorField<T>) -> Result<VectorField<T>> {
        self.check(b.spec())?;
        let scale = b.max_abs();
        self.require_divfree("B", b, 1e-8)?;
        let mean = b.mean();
        let m = mean.iter().fold(T::zero(), |acc, v| acc.max(v.abs())).as_f64();
        let tol = div_tolerance(1e-8, scale);
        if m > tol {
            return Err(Error::constraint("|mean B|", m, tol));
        }
        Ok(self.curl_inv_unchecked(b))
    }

    pub(crate) fn curl_inv_unchecked(&self, b: &VectorField<T>) -> VectorField<T> {
        let s = self.forward_vec(b);
        let [kx, ky, kz] = self.kd();
        let mut out = [self.empty_spectrum(), self.empty_spectrum(), self.empty_spectrum()];
        for idx in 0..self.spec().len() {
            let k = [kx[idx], ky[idx], kz[idx]];
            let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if kk == T::zero() {
                continue;
            }
            // i k × B / |k|²
            let c = [
                ik(k[1], s[2][idx]) - ik(k[2], s[1][idx]),
                ik(k[2], s[0][idx]) - ik(k[0], s[2][idx]),
                ik(k[0], s[1][idx]) - ik(k[1], s[0][idx]),
            ];
            for a in 0..3 {
                out[a][idx] = c[a] / kk;
            }
        }
        self.inverse_vec(out)
    }
}
