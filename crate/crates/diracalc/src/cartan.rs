//! Sections of the generalized tangent bundle 𝕋ℝⁿ = Tℝⁿ ⊕ T*ℝⁿ and their
//! Cartan calculus: the symmetric pairing, the (non-antisymmetric) Dorfman
//! bracket, and the graph constructions that turn bivectors, two-forms and
//! distributions into lagrangian families.

use crate::error::{Error, Result};
use crate::lagrangian::Family;
use crate::matrix::PolyMatrix;
use crate::poly::Polynomial;
use crate::scalar::{FieldMode, Scalar};
use std::collections::BTreeMap;

/// A generalized vector field u + ξ with polynomial components: `vec[j]` is
/// the coefficient of ∂/∂x_{j+1}, `cov[j]` the coefficient of dx_{j+1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSection {
    pub vec: Vec<Polynomial>,
    pub cov: Vec<Polynomial>,
}

impl GenSection {
    pub fn new(vec: Vec<Polynomial>, cov: Vec<Polynomial>) -> Self {
        assert_eq!(vec.len(), cov.len(), "component count mismatch");
        GenSection { vec, cov }
    }

    pub fn zero(n: usize) -> Self {
        GenSection {
            vec: vec![Polynomial::zero(n); n],
            cov: vec![Polynomial::zero(n); n],
        }
    }

    /// ∂/∂x_{i+1}
    pub fn basis_vector(n: usize, i: usize) -> Self {
        let mut s = GenSection::zero(n);
        s.vec[i] = Polynomial::one(n);
        s
    }

    /// dx_{i+1}
    pub fn basis_covector(n: usize, i: usize) -> Self {
        let mut s = GenSection::zero(n);
        s.cov[i] = Polynomial::one(n);
        s
    }

    pub fn dim(&self) -> usize {
        self.vec.len()
    }

    pub fn is_zero(&self) -> bool {
        self.vec.iter().chain(&self.cov).all(|p| p.is_zero())
    }

    fn check_dim(&self, other: &GenSection) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::VarCountMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    pub fn add(&self, other: &GenSection) -> Result<GenSection> {
        self.check_dim(other)?;
        Ok(GenSection {
            vec: zip_with(&self.vec, &other.vec, |a, b| a.add(b))?,
            cov: zip_with(&self.cov, &other.cov, |a, b| a.add(b))?,
        })
    }

    pub fn sub(&self, other: &GenSection) -> Result<GenSection> {
        self.check_dim(other)?;
        Ok(GenSection {
            vec: zip_with(&self.vec, &other.vec, |a, b| a.sub(b))?,
            cov: zip_with(&self.cov, &other.cov, |a, b| a.sub(b))?,
        })
    }

    pub fn neg(&self) -> GenSection {
        GenSection {
            vec: self.vec.iter().map(|p| p.neg()).collect(),
            cov: self.cov.iter().map(|p| p.neg()).collect(),
        }
    }

    /// Module action f·(u+ξ).
    pub fn scale(&self, f: &Polynomial) -> Result<GenSection> {
        Ok(GenSection {
            vec: self.vec.iter().map(|p| p.mul(f)).collect::<Result<_>>()?,
            cov: self.cov.iter().map(|p| p.mul(f)).collect::<Result<_>>()?,
        })
    }

    /// Only the vector part, pr_T(a).
    pub fn vector_part(&self) -> GenSection {
        let n = self.dim();
        GenSection {
            vec: self.vec.clone(),
            cov: vec![Polynomial::zero(n); n],
        }
    }

    /// Only the covector part, pr_{T*}(a).
    pub fn covector_part(&self) -> GenSection {
        let n = self.dim();
        GenSection {
            vec: vec![Polynomial::zero(n); n],
            cov: self.cov.clone(),
        }
    }

    /// All 2n components, vector block first. Row convention used by every
    /// frame matrix in the crate.
    pub fn coords(&self) -> Vec<Polynomial> {
        self.vec.iter().chain(&self.cov).cloned().collect()
    }

    pub fn from_coords(coords: &[Polynomial]) -> Self {
        let n = coords.len() / 2;
        assert_eq!(coords.len(), 2 * n);
        GenSection {
            vec: coords[..n].to_vec(),
            cov: coords[n..].to_vec(),
        }
    }

    pub fn conj(&self) -> GenSection {
        GenSection {
            vec: self.vec.iter().map(|p| p.conj()).collect(),
            cov: self.cov.iter().map(|p| p.conj()).collect(),
        }
    }

    pub fn check_mode(&self, mode: FieldMode) -> Result<()> {
        for p in self.vec.iter().chain(&self.cov) {
            p.check_mode(mode)?;
        }
        Ok(())
    }

    /// Substitute coordinates in every component (used for restriction to a
    /// submanifold).
    pub fn substitute(&self, assignment: &BTreeMap<usize, Polynomial>) -> Result<GenSection> {
        Ok(GenSection {
            vec: self
                .vec
                .iter()
                .map(|p| p.substitute(assignment))
                .collect::<Result<_>>()?,
            cov: self
                .cov
                .iter()
                .map(|p| p.substitute(assignment))
                .collect::<Result<_>>()?,
        })
    }
}

fn zip_with(
    a: &[Polynomial],
    b: &[Polynomial],
    f: impl Fn(&Polynomial, &Polynomial) -> Result<Polynomial>,
) -> Result<Vec<Polynomial>> {
    a.iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

/// ⟨u+ξ, v+η⟩ = η(u) + ξ(v) = Σ_j (ξ_j v^j + η_j u^j).
pub fn pairing(a: &GenSection, b: &GenSection) -> Result<Polynomial> {
    a.check_dim(b)?;
    let n = a.dim();
    let mut s = Polynomial::zero(n);
    for j in 0..n {
        s = s.add(&a.cov[j].mul(&b.vec[j])?)?;
        s = s.add(&b.cov[j].mul(&a.vec[j])?)?;
    }
    Ok(s)
}

/// Dorfman bracket [u+ξ, v+η] = [u,v] + ℒ_u η − ι_v dξ, componentwise:
/// vector k: Σ_j (u^j ∂_j v^k − v^j ∂_j u^k);
/// covector k: Σ_j (u^j ∂_j η_k + η_j ∂_k u^j − v^j ∂_j ξ_k + v^j ∂_k ξ_j).
pub fn dorfman(a: &GenSection, b: &GenSection) -> Result<GenSection> {
    a.check_dim(b)?;
    let n = a.dim();
    let (u, xi) = (&a.vec, &a.cov);
    let (v, eta) = (&b.vec, &b.cov);
    let mut out = GenSection::zero(n);
    for k in 0..n {
        let mut vk = Polynomial::zero(n);
        let mut ck = Polynomial::zero(n);
        for j in 0..n {
            vk = vk.add(&u[j].mul(&v[k].partial(j)?)?)?;
            vk = vk.sub(&v[j].mul(&u[k].partial(j)?)?)?;
            ck = ck.add(&u[j].mul(&eta[k].partial(j)?)?)?;
            ck = ck.add(&eta[j].mul(&u[j].partial(k)?)?)?;
            ck = ck.sub(&v[j].mul(&xi[k].partial(j)?)?)?;
            ck = ck.add(&v[j].mul(&xi[j].partial(k)?)?)?;
        }
        out.vec[k] = vk;
        out.cov[k] = ck;
    }
    Ok(out)
}

/// An antisymmetric matrix of polynomials: `W[i][j]` is ω(∂_{i+1}, ∂_{j+1}),
/// so (ι_{∂_{i+1}}ω)_j = W[i][j].
#[derive(Debug, Clone)]
pub struct TwoForm(pub PolyMatrix);

/// An antisymmetric matrix of polynomials: `P[i][j]` is the ∂_{i+1}-component
/// of π(dx_{j+1}).
#[derive(Debug, Clone)]
pub struct Bivector(pub PolyMatrix);

/// An endomorphism field N: TM → TM; `A[i][j]` is the ∂_{i+1}-component of
/// N(∂_{j+1}).
#[derive(Debug, Clone)]
pub struct Endomorphism(pub PolyMatrix);

fn check_antisymmetric(m: &PolyMatrix) -> Result<()> {
    let k = m.row_count();
    if m.col_count() != k {
        return Err(Error::NotAntisymmetric(m.row_count(), m.col_count()));
    }
    for i in 0..k {
        for j in i..k {
            if !m.at(i, j).add(m.at(j, i))?.is_zero() {
                return Err(Error::NotAntisymmetric(i, j));
            }
        }
    }
    Ok(())
}

impl TwoForm {
    pub fn new(m: PolyMatrix) -> Result<Self> {
        check_antisymmetric(&m)?;
        Ok(TwoForm(m))
    }

    /// Zero two-form on ℝⁿ (n coordinates, `vars` ambient variables).
    pub fn zero(vars: usize, n: usize) -> Self {
        TwoForm(PolyMatrix::new(vars, n, n))
    }

    /// dx_{i+1} ∧ dx_{j+1} summand with coefficient c.
    pub fn add_wedge(&mut self, i: usize, j: usize, c: Polynomial) -> Result<()> {
        let w = self.0.at(i, j).add(&c)?;
        self.0.set(i, j, w);
        let w = self.0.at(j, i).sub(&c)?;
        self.0.set(j, i, w);
        Ok(())
    }
}

impl Bivector {
    pub fn new(m: PolyMatrix) -> Result<Self> {
        check_antisymmetric(&m)?;
        Ok(Bivector(m))
    }

    pub fn zero(vars: usize, n: usize) -> Self {
        Bivector(PolyMatrix::new(vars, n, n))
    }

    /// ∂_{i+1} ∧ ∂_{j+1} summand with coefficient c, under the convention
    /// π(dx_{i+1}) = c·∂_{j+1}.
    pub fn add_wedge(&mut self, i: usize, j: usize, c: Polynomial) -> Result<()> {
        let w = self.0.at(j, i).add(&c)?;
        self.0.set(j, i, w);
        let w = self.0.at(i, j).sub(&c)?;
        self.0.set(i, j, w);
        Ok(())
    }

    /// π(ξ) as a vector field; component i is Σ_j P[i][j] ξ_j.
    pub fn apply(&self, cov: &[Polynomial]) -> Result<Vec<Polynomial>> {
        let n = self.0.row_count();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = Polynomial::zero(self.0.vars());
            for (j, xi) in cov.iter().enumerate() {
                s = s.add(&self.0.at(i, j).mul(xi)?)?;
            }
            out.push(s);
        }
        Ok(out)
    }
}

impl Endomorphism {
    pub fn new(m: PolyMatrix) -> Result<Self> {
        if m.row_count() != m.col_count() {
            return Err(Error::VarCountMismatch(m.row_count(), m.col_count()));
        }
        Ok(Endomorphism(m))
    }

    /// N(u) for a vector field u; component i is Σ_j A[i][j] u^j.
    pub fn apply(&self, vec: &[Polynomial]) -> Result<Vec<Polynomial>> {
        let n = self.0.row_count();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = Polynomial::zero(self.0.vars());
            for (j, u) in vec.iter().enumerate() {
                s = s.add(&self.0.at(i, j).mul(u)?)?;
            }
            out.push(s);
        }
        Ok(out)
    }

    /// Transpose action N*(η); component j is Σ_i A[i][j] η_i.
    pub fn apply_dual(&self, cov: &[Polynomial]) -> Result<Vec<Polynomial>> {
        let n = self.0.row_count();
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let mut s = Polynomial::zero(self.0.vars());
            for (i, eta) in cov.iter().enumerate() {
                s = s.add(&self.0.at(i, j).mul(eta)?)?;
            }
            out.push(s);
        }
        Ok(out)
    }
}

/// Gr(π) = {π(dx_j) + dx_j}: the pointwise graph of a bivector.
pub fn graph_bivector(pi: &Bivector) -> Result<Family> {
    let n = pi.0.row_count();
    let mut frame = Vec::with_capacity(n);
    for j in 0..n {
        let mut s = GenSection::basis_covector(n, j);
        for i in 0..n {
            s.vec[i] = pi.0.at(i, j).clone();
        }
        frame.push(s);
    }
    Family::lagrangian(n, frame, None)
}

/// Gr(ω) = {∂_j + ι_{∂_j}ω}: the pointwise graph of a two-form.
pub fn graph_two_form(omega: &TwoForm) -> Result<Family> {
    let n = omega.0.row_count();
    let mut frame = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = GenSection::basis_vector(n, i);
        for j in 0..n {
            s.cov[j] = omega.0.at(i, j).clone();
        }
        frame.push(s);
    }
    Family::lagrangian(n, frame, None)
}

/// Gr(F) = F ⊕ F° for a distribution given by a frame of vector fields.
/// The declared rank is the number of generators; a generically dependent
/// frame is rejected.
pub fn graph_distribution(n: usize, generators: &[Vec<Polynomial>]) -> Result<Family> {
    if generators.is_empty() {
        return Ok(full_cotangent(n));
    }
    let m = PolyMatrix::from_rows(n, generators.to_vec());
    let r = m.generic_rank();
    if r != generators.len() {
        return Err(Error::DistributionRankDefect {
            declared: generators.len(),
            found: r,
        });
    }
    let mut frame: Vec<GenSection> = generators
        .iter()
        .map(|g| GenSection::new(g.clone(), vec![Polynomial::zero(n); n]))
        .collect();
    // Annihilator F°: covectors killing every generator.
    for ann in m.generic_kernel() {
        frame.push(GenSection::new(vec![Polynomial::zero(n); n], ann));
    }
    Family::lagrangian(n, frame, None)
}

/// Tℝⁿ ⊕ 0 as a lagrangian family.
pub fn full_tangent(n: usize) -> Family {
    Family::lagrangian(n, (0..n).map(|i| GenSection::basis_vector(n, i)).collect(), None)
        .expect("coordinate frame")
}

/// 0 ⊕ T*ℝⁿ as a lagrangian family.
pub fn full_cotangent(n: usize) -> Family {
    Family::lagrangian(n, (0..n).map(|i| GenSection::basis_covector(n, i)).collect(), None)
        .expect("coordinate frame")
}

/// TX ⊕ N*X as a lagrangian family on the ambient space, from explicit
/// tangent and conormal frames of a submanifold.
pub fn conormal_of(
    n: usize,
    tangent: &[Vec<Polynomial>],
    conormal: &[Vec<Polynomial>],
) -> Result<Family> {
    let mut frame: Vec<GenSection> = tangent
        .iter()
        .map(|g| GenSection::new(g.clone(), vec![Polynomial::zero(n); n]))
        .collect();
    frame.extend(
        conormal
            .iter()
            .map(|g| GenSection::new(vec![Polynomial::zero(n); n], g.clone())),
    );
    Family::lagrangian(n, frame, None)
}

/// ℛ_t: multiply every covector component by the nonzero scalar t.
/// ℛ_{−1}(Gr(π)) = Gr(−π); ℛ_1 is the identity.
pub fn rescale_covectors(t: &Scalar, fam: &Family) -> Result<Family> {
    if t.is_zero() {
        return Err(Error::ZeroRescale);
    }
    let frame = fam
        .frame()
        .iter()
        .map(|s| GenSection {
            vec: s.vec.clone(),
            cov: s.cov.iter().map(|p| p.scale(t)).collect(),
        })
        .collect();
    Family::with_rank(fam.dim(), frame, fam.rank(), fam.label().cloned())
}

/// Componentwise complex conjugation; only meaningful over ℚ(i).
pub fn conjugate_family(fam: &Family, mode: FieldMode) -> Result<Family> {
    if mode != FieldMode::Gaussian {
        return Err(Error::NotGaussianMode);
    }
    let frame = fam.frame().iter().map(|s| s.conj()).collect();
    Family::with_rank(fam.dim(), frame, fam.rank(), fam.label().cloned())
}
