//! Isotropic and lagrangian families of 𝕋ℝⁿ as generic frames: membership,
//! equality, the Courant tensor and involutivity, the two products ⋆ and ⊛,
//! stretches L[I], kernels L∩TM, and concurrence of Dirac structures.
//!
//! Everything here is generic: a frame represents the subbundle it spans on
//! the dense open set where it has full rank. Statements about every single
//! point are only ever probe-verified and reported as such.

use crate::cartan::{dorfman, pairing, GenSection};
use crate::error::{Error, Result};
use crate::matrix::PolyMatrix;
use crate::poly::Polynomial;
use crate::probe::ProbePoint;

/// A frame of generically independent, pairwise-orthogonal sections of
/// 𝕋ℝⁿ. Rank n means the family is generically lagrangian.
#[derive(Debug, Clone)]
pub struct Family {
    n: usize,
    frame: Vec<GenSection>,
    label: Option<String>,
}

/// Evidence attached to a failed involutivity or concurrence check: the
/// frame indices involved and a polynomial that should vanish but does not.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub indices: Vec<usize>,
    pub residual: Polynomial,
}

/// Involutivity verdict with the first counterexample when it fails.
#[derive(Debug, Clone)]
pub struct InvolutivityReport {
    pub involutive: bool,
    pub certificate: Option<Certificate>,
}

/// How strong a concurrence verdict is asked for: `Weak` only requires the
/// product to be involutive where smooth; `Full` additionally requires
/// probe-constant rank n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcurMode {
    Weak,
    Full,
}

/// Outcome of a concurrence check, keeping the product family for reuse.
#[derive(Debug, Clone)]
pub struct ConcurrenceReport {
    pub product: Family,
    pub involutive: bool,
    pub certificate: Option<Certificate>,
    /// Probe points where the product frame drops below rank n.
    pub rank_drops: Vec<ProbePoint>,
    pub verdict: bool,
}

fn combine(n: usize, frame: &[GenSection], coeffs: &[Polynomial]) -> Result<GenSection> {
    let mut s = GenSection::zero(n);
    for (sec, c) in frame.iter().zip(coeffs) {
        s = s.add(&sec.scale(c)?)?;
    }
    Ok(s)
}

impl Family {
    /// Isotropic family: every pairwise pairing must vanish identically;
    /// the frame is pruned to its first generically independent sections.
    pub fn isotropic(n: usize, frame: Vec<GenSection>, label: Option<String>) -> Result<Family> {
        for s in &frame {
            if s.dim() != n {
                return Err(Error::VarCountMismatch(s.dim(), n));
            }
        }
        for i in 0..frame.len() {
            for j in i..frame.len() {
                let p = pairing(&frame[i], &frame[j])?;
                if !p.is_zero() {
                    return Err(Error::NotIsotropic(i, j, p.to_string()));
                }
            }
        }
        let rows: Vec<Vec<Polynomial>> = frame.iter().map(|s| s.coords()).collect();
        let pruned = if rows.is_empty() {
            Vec::new()
        } else {
            let m = PolyMatrix::from_rows(n, rows);
            let keep = m.generic_independent_rows();
            keep.into_iter().map(|i| frame[i].clone()).collect()
        };
        Ok(Family {
            n,
            frame: pruned,
            label,
        })
    }

    /// Lagrangian family: isotropic of generic rank exactly n.
    pub fn lagrangian(n: usize, frame: Vec<GenSection>, label: Option<String>) -> Result<Family> {
        let fam = Family::isotropic(n, frame, label)?;
        if fam.rank() != n {
            return Err(Error::RankDefect {
                expected: n,
                found: fam.rank(),
            });
        }
        Ok(fam)
    }

    /// Rebuild after a rank-preserving frame map (rescale, conjugation).
    pub fn with_rank(
        n: usize,
        frame: Vec<GenSection>,
        rank: usize,
        label: Option<String>,
    ) -> Result<Family> {
        let fam = Family::isotropic(n, frame, label)?;
        if fam.rank() != rank {
            return Err(Error::RankDefect {
                expected: rank,
                found: fam.rank(),
            });
        }
        Ok(fam)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.frame.len()
    }

    pub fn is_lagrangian(&self) -> bool {
        self.rank() == self.n
    }

    pub fn frame(&self) -> &[GenSection] {
        &self.frame
    }

    pub fn label(&self) -> Option<&String> {
        self.label.as_ref()
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = Some(label.into());
    }

    /// Frame matrix, one row per section, 2n columns (vector block first).
    pub fn matrix(&self) -> PolyMatrix {
        PolyMatrix::from_rows(self.n, self.frame.iter().map(|s| s.coords()).collect())
    }

    /// Rank of the evaluated frame at a point.
    pub fn rank_at(&self, point: &ProbePoint) -> Result<usize> {
        self.matrix().rank_at(point)
    }

    /// Generic membership: true iff adding `a` to the frame does not raise
    /// the generic rank (equivalently, all (r+1)-minors of the augmented
    /// frame matrix vanish identically).
    pub fn contains(&self, a: &GenSection) -> bool {
        self.membership_residual(a).is_none()
    }

    /// `None` when contained; otherwise a nonzero (r+1)-minor of the
    /// augmented frame matrix as evidence.
    pub fn membership_residual(&self, a: &GenSection) -> Option<Polynomial> {
        let mut rows: Vec<Vec<Polynomial>> = self.frame.iter().map(|s| s.coords()).collect();
        rows.push(a.coords());
        let ech = PolyMatrix::from_rows(self.n, rows).echelon();
        if ech.pivots.len() == self.rank() {
            None
        } else {
            Some(ech.denom)
        }
    }

    /// Generic equality of spans (mutual containment on a dense open set).
    pub fn family_equal(&self, other: &Family) -> bool {
        if self.n != other.n || self.rank() != other.rank() {
            return false;
        }
        let mut rows: Vec<Vec<Polynomial>> = self.frame.iter().map(|s| s.coords()).collect();
        rows.extend(other.frame.iter().map(|s| s.coords()));
        PolyMatrix::from_rows(self.n, rows).generic_rank() == self.rank()
    }

    /// Υ(a_i, a_j, a_k) = ⟨[a_i, a_j], a_k⟩.
    pub fn courant_tensor(&self, i: usize, j: usize, k: usize) -> Result<Polynomial> {
        let r = self.rank();
        for idx in [i, j, k] {
            if idx >= r {
                return Err(Error::IndexOutOfRange {
                    index: idx,
                    dim: r,
                });
            }
        }
        pairing(&dorfman(&self.frame[i], &self.frame[j])?, &self.frame[k])
    }

    /// For a lagrangian family: the Courant tensor vanishes on all frame
    /// triples. For a smaller isotropic family: every Dorfman bracket of
    /// frame sections lies back in the family (membership form).
    pub fn is_involutive(&self) -> Result<InvolutivityReport> {
        if self.is_lagrangian() {
            for i in 0..self.rank() {
                for j in 0..self.rank() {
                    for k in 0..self.rank() {
                        let residual = self.courant_tensor(i, j, k)?;
                        if !residual.is_zero() {
                            return Ok(InvolutivityReport {
                                involutive: false,
                                certificate: Some(Certificate {
                                    indices: vec![i, j, k],
                                    residual,
                                }),
                            });
                        }
                    }
                }
            }
        } else {
            for i in 0..self.rank() {
                for j in 0..self.rank() {
                    let b = dorfman(&self.frame[i], &self.frame[j])?;
                    if let Some(residual) = self.membership_residual(&b) {
                        return Ok(InvolutivityReport {
                            involutive: false,
                            certificate: Some(Certificate {
                                indices: vec![i, j],
                                residual,
                            }),
                        });
                    }
                }
            }
        }
        Ok(InvolutivityReport {
            involutive: true,
            certificate: None,
        })
    }

    fn product(&self, other: &Family, match_vectors: bool) -> Result<Family> {
        if self.n != other.n {
            return Err(Error::VarCountMismatch(self.n, other.n));
        }
        let n = self.n;
        // Constraint matrix: columns are frame coefficients (self first,
        // other negated), rows the matched block of pr(a − b).
        let mut rows = vec![Vec::with_capacity(self.rank() + other.rank()); n];
        for s in &self.frame {
            let block = if match_vectors { &s.vec } else { &s.cov };
            for (k, row) in rows.iter_mut().enumerate() {
                row.push(block[k].clone());
            }
        }
        for s in &other.frame {
            let block = if match_vectors { &s.vec } else { &s.cov };
            for (k, row) in rows.iter_mut().enumerate() {
                row.push(block[k].neg());
            }
        }
        let kernel = PolyMatrix::from_rows(n, rows).generic_kernel();
        let mut frame = Vec::with_capacity(kernel.len());
        for c in kernel {
            let a = combine(n, &self.frame, &c[..self.rank()])?;
            let b = combine(n, &other.frame, &c[self.rank()..])?;
            // Image map: a + pr_{T*}(b) when vectors were matched,
            // a + pr_T(b) when covectors were.
            let img = if match_vectors {
                a.add(&b.covector_part())?
            } else {
                a.add(&b.vector_part())?
            };
            frame.push(img);
        }
        Family::lagrangian(n, frame, None).map_err(|e| match e {
            Error::RankDefect { expected, found } => {
                Error::ProductNotGenericallyLagrangian { expected, found }
            }
            other => other,
        })
    }

    /// L ⋆ R = {a + pr_{T*}(b) : a ∈ L, b ∈ R, pr_T(a − b) = 0}.
    pub fn tangent_product(&self, other: &Family) -> Result<Family> {
        self.product(other, true)
    }

    /// L ⊛ R = {a + pr_T(b) : a ∈ L, b ∈ R, pr_{T*}(a − b) = 0}.
    pub fn cotangent_product(&self, other: &Family) -> Result<Family> {
        self.product(other, false)
    }

    /// L[I] = L ∩ I^⊥ + I, the lagrangian family closest to L among those
    /// containing the isotropic family I.
    pub fn stretch(&self, iso: &Family) -> Result<Family> {
        if self.n != iso.n {
            return Err(Error::VarCountMismatch(self.n, iso.n));
        }
        let n = self.n;
        let mut frame = Vec::new();
        if iso.rank() == 0 {
            frame = self.frame.clone();
        } else {
            // ⟨a_i, e_j⟩ constraint matrix: rows over I's frame, columns
            // over L's; its kernel gives L ∩ I^⊥.
            let mut rows = Vec::with_capacity(iso.rank());
            for e in &iso.frame {
                let mut row = Vec::with_capacity(self.rank());
                for a in &self.frame {
                    row.push(pairing(a, e)?);
                }
                rows.push(row);
            }
            for c in PolyMatrix::from_rows(n, rows).generic_kernel() {
                frame.push(combine(n, &self.frame, &c)?);
            }
            frame.extend(iso.frame.iter().cloned());
        }
        Family::lagrangian(n, frame, None).map_err(|e| match e {
            Error::RankDefect { expected, found } => Error::StretchRankDefect { expected, found },
            other => other,
        })
    }

    /// K(L) = L ∩ TM: the sections of L with identically zero covector
    /// part, as an isotropic family of vector fields.
    pub fn kernel(&self) -> Result<Family> {
        let n = self.n;
        // Covector block, one row per component, one column per section.
        let mut rows = vec![Vec::with_capacity(self.rank()); n];
        for s in &self.frame {
            for (k, row) in rows.iter_mut().enumerate() {
                row.push(s.cov[k].clone());
            }
        }
        let mut frame = Vec::new();
        for c in PolyMatrix::from_rows(n, rows).generic_kernel() {
            let s = combine(n, &self.frame, &c)?;
            debug_assert!(s.cov.iter().all(|p| p.is_zero()));
            frame.push(s.vector_part());
        }
        Family::isotropic(n, frame, None)
    }

    /// Generic subfamily of `self` orthogonal (under the pairing) to every
    /// given section: kernel of the pairing matrix, pushed back into the
    /// frame.
    pub fn orthogonal_to(&self, sections: &[GenSection]) -> Result<Family> {
        let n = self.n;
        if sections.is_empty() {
            return Family::isotropic(n, self.frame.clone(), None);
        }
        let mut rows = Vec::with_capacity(sections.len());
        for e in sections {
            let mut row = Vec::with_capacity(self.rank());
            for a in &self.frame {
                row.push(pairing(a, e)?);
            }
            rows.push(row);
        }
        let mut frame = Vec::new();
        for c in PolyMatrix::from_rows(n, rows).generic_kernel() {
            frame.push(combine(n, &self.frame, &c)?);
        }
        Family::isotropic(n, frame, None)
    }

    /// Generic intersection of two isotropic families: combinations of
    /// `self`'s frame that also lie in `other`.
    pub fn intersection(&self, other: &Family) -> Result<Family> {
        if self.n != other.n {
            return Err(Error::VarCountMismatch(self.n, other.n));
        }
        let n = self.n;
        // Columns: self coefficients, then other's negated; a kernel vector
        // is a section writable in both frames.
        let mut rows = vec![Vec::with_capacity(self.rank() + other.rank()); 2 * n];
        for s in &self.frame {
            for (k, c) in s.coords().into_iter().enumerate() {
                rows[k].push(c);
            }
        }
        for s in &other.frame {
            for (k, c) in s.coords().into_iter().enumerate() {
                rows[k].push(c.neg());
            }
        }
        let mut frame = Vec::new();
        for c in PolyMatrix::from_rows(n, rows).generic_kernel() {
            frame.push(combine(n, &self.frame, &c[..self.rank()])?);
        }
        Family::isotropic(n, frame, None)
    }

    /// Do L and R concur? Computes L ⊛ R, checks involutivity, and in
    /// `Full` mode also that the product has rank n at every probe point.
    pub fn concur(
        &self,
        other: &Family,
        mode: ConcurMode,
        probes: &[ProbePoint],
    ) -> Result<ConcurrenceReport> {
        let product = self.cotangent_product(other)?;
        let inv = product.is_involutive()?;
        let mut rank_drops = Vec::new();
        if mode == ConcurMode::Full {
            for pt in probes {
                if product.rank_at(pt)? != self.n {
                    rank_drops.push(pt.clone());
                }
            }
        }
        let verdict = inv.involutive && rank_drops.is_empty();
        Ok(ConcurrenceReport {
            product,
            involutive: inv.involutive,
            certificate: inv.certificate,
            rank_drops,
            verdict,
        })
    }
}
