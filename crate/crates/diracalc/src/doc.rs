//! JSON problem documents and reports: a document declares a manifold,
//! named structures, optional geometry (submanifold, projection, witness),
//! and a list of tasks; running it produces a deterministic report with one
//! verdict per task. Coordinate and generator indices in documents are
//! 1-based; polynomials are strings in the expression grammar.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cartan::{
    conjugate_family, full_cotangent, full_tangent, graph_bivector, graph_distribution,
    graph_two_form, rescale_covectors, Bivector, Endomorphism, GenSection, TwoForm,
};
use crate::error::{Error, Result};
use crate::lagrangian::{ConcurMode, Family};
use crate::matrix::PolyMatrix;
use crate::nijenhuis::{dn_bracket, is_dirac_nijenhuis, omega_n_check, pn_check, shift, ShiftSide};
use crate::poly::Polynomial;
use crate::probe::probe_points;
use crate::reduction::{
    check_mr, check_witness, diamond, dirac_reduce, magri_m, magri_n, pullback, pushforward,
    split_ranks, DiamondKind, ReductionTriangle,
};
use crate::scalar::{FieldMode, Scalar};
use crate::submanifold::{linear_coordinate_change, Projection, Submanifold};

fn doc_err(msg: impl Into<String>) -> Error {
    Error::Document(msg.into())
}

// ---------------------------------------------------------------------------
// Document schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    /// Free-text provenance note for the document.
    #[serde(default)]
    pub source: Option<String>,
    pub manifold: ManifoldSpec,
    #[serde(default)]
    pub structures: BTreeMap<String, StructureSpec>,
    #[serde(default)]
    pub submanifold: Option<SubmanifoldSpec>,
    /// Retained coordinates (1-based) of the projection X → Y (or M → Y
    /// when no submanifold is given).
    #[serde(default)]
    pub projection: Option<Vec<usize>>,
    /// Generators of a candidate witness subbundle E ⊂ TM|_X, as ambient
    /// vector components.
    #[serde(default)]
    pub witness: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    pub dim: usize,
    #[serde(default = "default_field")]
    pub field: FieldMode,
}

fn default_field() -> FieldMode {
    FieldMode::Rational
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StructureSpec {
    /// Graph of Σ c·∂_i∧∂_j (1-based indices).
    BivectorGraph { wedges: Vec<WedgeSpec> },
    /// Graph of Σ c·dx_i∧dx_j (1-based indices).
    TwoFormGraph { wedges: Vec<WedgeSpec> },
    /// Gr(E) = E ⊕ E° for the span E of the generators.
    DistributionGraph { generators: Vec<Vec<String>> },
    /// Explicit frame of sections.
    Family { frame: Vec<SectionSpec> },
    /// TM ⊕ 0.
    Tangent {},
    /// 0 ⊕ T*M.
    Cotangent {},
    /// Endomorphism of TM; `matrix` is row-major, column j = N(∂_j).
    Endomorphism { matrix: Vec<Vec<String>> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WedgeSpec {
    pub i: usize,
    pub j: usize,
    #[serde(default = "one_string")]
    pub coeff: String,
}

fn one_string() -> String {
    "1".to_string()
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    pub vec: Vec<String>,
    pub cov: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubmanifoldSpec {
    /// {x_j = c_j}; keys are 1-based coordinate indices (as JSON strings),
    /// values rational constants.
    Slice { fixed: BTreeMap<String, String> },
    /// {x_j = g_j(base)}; `base` lists the free coordinates (1-based).
    Graph {
        base: Vec<usize>,
        dependents: BTreeMap<String, String>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub op: String,
    /// Names of previously declared structures or task results.
    #[serde(default)]
    pub args: Vec<String>,
    /// Bind the result under this name for later tasks.
    #[serde(default)]
    pub name: Option<String>,
    /// Concurrence mode: "weak" (default) or "full".
    #[serde(default)]
    pub mode: Option<String>,
    /// Diamond kind: "kernel" or "magri".
    #[serde(default)]
    pub kind: Option<String>,
    /// Shift side: "left" or "right".
    #[serde(default)]
    pub side: Option<String>,
    /// Shift exponent.
    #[serde(default)]
    pub k: Option<u32>,
    /// 1-based generator indices (courant_tensor, torsion).
    #[serde(default)]
    pub indices: Option<Vec<usize>>,
    /// Scalar constant (rescale_covectors).
    #[serde(default)]
    pub scalar: Option<String>,
    /// Per-task retained coordinates (1-based), overriding the document
    /// projection.
    #[serde(default)]
    pub retained: Option<Vec<usize>>,
    /// Linear coordinate change, row-major scalar matrix.
    #[serde(default)]
    pub matrix: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub expect: Option<ExpectSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectSpec {
    /// Result family must be family_equal to this structure.
    #[serde(default)]
    pub family: Option<StructureSpec>,
    /// Dimension of the manifold the expected family lives on, when it
    /// differs from the ambient (pushforward/pullback results).
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub verdict: Option<bool>,
    /// Certificate residual, exact polynomial match up to sign.
    #[serde(default)]
    pub residual: Option<String>,
    #[serde(default)]
    pub poly: Option<String>,
    #[serde(default)]
    pub vector: Option<Vec<String>>,
    #[serde(default)]
    pub rank: Option<usize>,
    #[serde(default)]
    pub non_constant_rank: Option<bool>,
    #[serde(default)]
    pub wit1: Option<bool>,
    #[serde(default)]
    pub wit2: Option<bool>,
    #[serde(default)]
    pub wit3: Option<bool>,
    #[serde(default)]
    pub mr1: Option<bool>,
    #[serde(default)]
    pub mr1prime: Option<bool>,
    #[serde(default)]
    pub mr2: Option<bool>,
    /// Expected per-vertex families of a diamond, keyed "left"/"right"/
    /// "bottom"/"top".
    #[serde(default)]
    pub vertices: Option<BTreeMap<String, VertexExpect>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexExpect {
    /// Retained ambient coordinates (1-based).
    #[serde(default)]
    pub retained: Option<Vec<usize>>,
    #[serde(default)]
    pub l: Option<StructureSpec>,
    #[serde(default)]
    pub r: Option<StructureSpec>,
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub source: Option<String>,
    pub seed: u64,
    pub probes: usize,
    pub tasks: Vec<TaskReport>,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskReport {
    pub index: usize,
    pub op: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// "pass" / "fail" when the task has an expectation, "done" otherwise.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

/// A named value in the task environment.
#[derive(Debug, Clone)]
enum Value {
    Fam {
        family: Family,
        bivector: Option<Bivector>,
        two_form: Option<TwoForm>,
    },
    Endo(Endomorphism),
}

impl Value {
    fn family(&self, name: &str) -> Result<&Family> {
        match self {
            Value::Fam { family, .. } => Ok(family),
            Value::Endo(_) => Err(doc_err(format!("'{name}' is an endomorphism, not a family"))),
        }
    }

    fn endo(&self, name: &str) -> Result<&Endomorphism> {
        match self {
            Value::Endo(e) => Ok(e),
            Value::Fam { .. } => Err(doc_err(format!("'{name}' is a family, not an endomorphism"))),
        }
    }

    fn bivector(&self, name: &str) -> Result<&Bivector> {
        match self {
            Value::Fam {
                bivector: Some(b), ..
            } => Ok(b),
            _ => Err(doc_err(format!("'{name}' is not a bivector graph"))),
        }
    }

    fn two_form(&self, name: &str) -> Result<&TwoForm> {
        match self {
            Value::Fam {
                two_form: Some(w), ..
            } => Ok(w),
            _ => Err(doc_err(format!("'{name}' is not a two-form graph"))),
        }
    }
}

struct Runner {
    mode: FieldMode,
    dim: usize,
    seed: u64,
    probe_count: usize,
    env: BTreeMap<String, Value>,
    submanifold: Option<Submanifold>,
    projection: Option<Vec<usize>>,
    witness: Option<Vec<Vec<Polynomial>>>,
}

impl Runner {
    fn poly(&self, s: &str, n: usize) -> Result<Polynomial> {
        Polynomial::parse(s, n, self.mode)
    }

    fn scalar(&self, s: &str) -> Result<Scalar> {
        let p = self.poly(s, 0)?;
        p.eval(&[])
    }

    fn vector(&self, v: &[String], n: usize) -> Result<Vec<Polynomial>> {
        if v.len() != n {
            return Err(doc_err(format!(
                "component list has length {}, expected {n}",
                v.len()
            )));
        }
        v.iter().map(|s| self.poly(s, n)).collect()
    }

    fn zero_based(&self, i: usize, n: usize) -> Result<usize> {
        if i == 0 || i > n {
            return Err(doc_err(format!("index {i} out of range 1..={n}")));
        }
        Ok(i - 1)
    }

    fn instantiate(&self, spec: &StructureSpec, n: usize) -> Result<Value> {
        match spec {
            StructureSpec::BivectorGraph { wedges } => {
                let mut pi = Bivector::zero(n, n);
                for w in wedges {
                    pi.add_wedge(
                        self.zero_based(w.i, n)?,
                        self.zero_based(w.j, n)?,
                        self.poly(&w.coeff, n)?,
                    )?;
                }
                Ok(Value::Fam {
                    family: graph_bivector(&pi)?,
                    bivector: Some(pi),
                    two_form: None,
                })
            }
            StructureSpec::TwoFormGraph { wedges } => {
                let mut om = TwoForm::zero(n, n);
                for w in wedges {
                    om.add_wedge(
                        self.zero_based(w.i, n)?,
                        self.zero_based(w.j, n)?,
                        self.poly(&w.coeff, n)?,
                    )?;
                }
                Ok(Value::Fam {
                    family: graph_two_form(&om)?,
                    bivector: None,
                    two_form: Some(om),
                })
            }
            StructureSpec::DistributionGraph { generators } => {
                let gens: Vec<Vec<Polynomial>> = generators
                    .iter()
                    .map(|g| self.vector(g, n))
                    .collect::<Result<_>>()?;
                Ok(Value::Fam {
                    family: graph_distribution(n, &gens)?,
                    bivector: None,
                    two_form: None,
                })
            }
            StructureSpec::Family { frame } => {
                let sections = frame
                    .iter()
                    .map(|s| {
                        Ok(GenSection::new(
                            self.vector(&s.vec, n)?,
                            self.vector(&s.cov, n)?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Value::Fam {
                    family: Family::isotropic(n, sections, None)?,
                    bivector: None,
                    two_form: None,
                })
            }
            StructureSpec::Tangent {} => Ok(Value::Fam {
                family: full_tangent(n),
                bivector: None,
                two_form: None,
            }),
            StructureSpec::Cotangent {} => Ok(Value::Fam {
                family: full_cotangent(n),
                bivector: None,
                two_form: None,
            }),
            StructureSpec::Endomorphism { matrix } => {
                if matrix.len() != n {
                    return Err(doc_err(format!(
                        "endomorphism matrix has {} rows, expected {n}",
                        matrix.len()
                    )));
                }
                let mut m = PolyMatrix::new(n, n, n);
                for (i, row) in matrix.iter().enumerate() {
                    if row.len() != n {
                        return Err(doc_err(format!(
                            "endomorphism row {} has {} entries, expected {n}",
                            i + 1,
                            row.len()
                        )));
                    }
                    for (j, s) in row.iter().enumerate() {
                        m.set(i, j, self.poly(s, n)?);
                    }
                }
                Ok(Value::Endo(Endomorphism::new(m)?))
            }
        }
    }

    fn lookup(&self, name: &str) -> Result<&Value> {
        self.env
            .get(name)
            .ok_or_else(|| doc_err(format!("'{name}' is not declared")))
    }

    fn arg<'a>(&self, task: &'a TaskSpec, i: usize) -> Result<&'a str> {
        task.args
            .get(i)
            .map(String::as_str)
            .ok_or_else(|| doc_err(format!("op '{}' needs at least {} argument(s)", task.op, i + 1)))
    }

    fn arg_family(&self, task: &TaskSpec, i: usize) -> Result<&Family> {
        let name = self.arg(task, i)?;
        self.lookup(name)?.family(name)
    }

    fn submanifold(&self) -> Result<&Submanifold> {
        self.submanifold
            .as_ref()
            .ok_or_else(|| doc_err("this op needs a 'submanifold' block"))
    }

    /// Build the projection from the document's retained coordinates, which
    /// always refer to ambient coordinates; when the projection lives on a
    /// submanifold X they are translated to intrinsic coordinates of X.
    fn projection_on(&self, x: Option<&Submanifold>, retained: Option<&Vec<usize>>) -> Result<Projection> {
        let retained = retained
            .or(self.projection.as_ref())
            .ok_or_else(|| doc_err("this op needs a projection ('retained' or document-level)"))?;
        let cols = match x {
            None => retained
                .iter()
                .map(|&i| self.zero_based(i, self.dim))
                .collect::<Result<Vec<_>>>()?,
            Some(x) => {
                let map = x.var_map();
                retained
                    .iter()
                    .map(|&i| {
                        map[self.zero_based(i, self.dim)?].ok_or_else(|| {
                            doc_err(format!("retained coordinate {i} is not free on the submanifold"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        let dim = x.map_or(self.dim, Submanifold::dim);
        Projection::new(dim, cols)
    }

    fn witness(&self) -> Result<&Vec<Vec<Polynomial>>> {
        self.witness
            .as_ref()
            .ok_or_else(|| doc_err("this op needs a 'witness' block"))
    }
}

fn family_json(fam: &Family) -> serde_json::Value {
    let frame: Vec<SectionSpec> = fam
        .frame()
        .iter()
        .map(|s| SectionSpec {
            vec: s.vec.iter().map(|p| p.to_string()).collect(),
            cov: s.cov.iter().map(|p| p.to_string()).collect(),
        })
        .collect();
    serde_json::json!({ "dim": fam.dim(), "rank": fam.rank(), "frame": frame })
}

/// Outcome of one task: a detail object for the report, plus the flat facts
/// expectations are checked against.
#[derive(Default)]
struct Outcome {
    family: Option<Family>,
    verdict: Option<bool>,
    residual: Option<Polynomial>,
    poly: Option<Polynomial>,
    vector: Option<Vec<Polynomial>>,
    rank: Option<usize>,
    non_constant_rank: Option<bool>,
    wit: Option<[bool; 3]>,
    mr: Option<[bool; 3]>,
    vertices: Option<Vec<(String, Vec<usize>, Family, Family)>>,
    detail: serde_json::Map<String, serde_json::Value>,
}

impl Outcome {
    fn with_family(mut self, fam: Family) -> Self {
        self.detail.insert("family".into(), family_json(&fam));
        self.family = Some(fam);
        self
    }

    fn with_verdict(mut self, v: bool) -> Self {
        self.detail.insert("verdict".into(), v.into());
        self.verdict = Some(v);
        self
    }

    fn with_residual(mut self, r: Option<Polynomial>) -> Self {
        if let Some(r) = r {
            self.detail.insert("residual".into(), r.to_string().into());
            self.residual = Some(r);
        }
        self
    }
}

impl Runner {
    fn execute(&mut self, task: &TaskSpec) -> Result<Outcome> {
        let probes = |dim: usize| probe_points(dim, self.probe_count, self.seed);
        let out = Outcome::default();
        match task.op.as_str() {
            "tangent_product" => {
                let f = self
                    .arg_family(task, 0)?
                    .tangent_product(self.arg_family(task, 1)?)?;
                Ok(out.with_family(f))
            }
            "cotangent_product" => {
                let f = self
                    .arg_family(task, 0)?
                    .cotangent_product(self.arg_family(task, 1)?)?;
                Ok(out.with_family(f))
            }
            "stretch" => {
                let f = self.arg_family(task, 0)?.stretch(self.arg_family(task, 1)?)?;
                Ok(out.with_family(f))
            }
            "kernel" => {
                let k = self.arg_family(task, 0)?.kernel()?;
                let mut out = out;
                out.rank = Some(k.rank());
                out.detail.insert("rank".into(), k.rank().into());
                Ok(out.with_family(k))
            }
            "rescale_covectors" => {
                let t = self.scalar(
                    task.scalar
                        .as_deref()
                        .ok_or_else(|| doc_err("rescale_covectors needs 'scalar'"))?,
                )?;
                let f = rescale_covectors(&t, self.arg_family(task, 0)?)?;
                Ok(out.with_family(f))
            }
            "conjugate" => {
                let f = conjugate_family(self.arg_family(task, 0)?, self.mode)?;
                Ok(out.with_family(f))
            }
            "family_equal" => {
                let v = self
                    .arg_family(task, 0)?
                    .family_equal(self.arg_family(task, 1)?);
                Ok(out.with_verdict(v))
            }
            "is_involutive" => {
                let rep = self.arg_family(task, 0)?.is_involutive()?;
                Ok(out
                    .with_verdict(rep.involutive)
                    .with_residual(rep.certificate.map(|c| c.residual)))
            }
            "courant_tensor" => {
                let idx = task
                    .indices
                    .as_ref()
                    .filter(|v| v.len() == 3)
                    .ok_or_else(|| doc_err("courant_tensor needs 'indices' [i, j, k]"))?;
                let fam = self.arg_family(task, 0)?;
                let r = fam.rank();
                let p = fam.courant_tensor(
                    self.zero_based(idx[0], r)?,
                    self.zero_based(idx[1], r)?,
                    self.zero_based(idx[2], r)?,
                )?;
                let mut out = out;
                out.detail.insert("poly".into(), p.to_string().into());
                out.poly = Some(p);
                Ok(out)
            }
            "concur" => {
                let mode = match task.mode.as_deref().unwrap_or("weak") {
                    "weak" => ConcurMode::Weak,
                    "full" => ConcurMode::Full,
                    other => return Err(doc_err(format!("unknown concurrence mode '{other}'"))),
                };
                let l = self.arg_family(task, 0)?;
                let rep = l.concur(self.arg_family(task, 1)?, mode, &probes(l.dim()))?;
                Ok(out
                    .with_verdict(rep.verdict)
                    .with_residual(rep.certificate.map(|c| c.residual)))
            }
            "pullback" => {
                let x = self.submanifold()?;
                let rep = pullback(self.arg_family(task, 0)?, x, &probes(x.dim()))?;
                let mut out = out.with_family(rep.family);
                let flag = rep.non_constant_rank.is_some();
                out.non_constant_rank = Some(flag);
                out.detail.insert("non_constant_rank".into(), flag.into());
                if let Some(pt) = rep.non_constant_rank {
                    out.detail.insert(
                        "rank_drop_probe".into(),
                        pt.iter().map(|s| s.to_string()).collect::<Vec<_>>().into(),
                    );
                }
                Ok(out)
            }
            "pushforward" => {
                let l = self.arg_family(task, 0)?;
                let p = self.projection_on(None, task.retained.as_ref())?;
                Ok(out.with_family(pushforward(l, &p)?))
            }
            "dirac_reduce" => {
                let x = self.submanifold()?.clone();
                let p = self.projection_on(Some(&x), task.retained.as_ref())?;
                let pts = probes(x.dim());
                let rep = dirac_reduce(self.arg_family(task, 0)?, &ReductionTriangle { x, p }, &pts)?;
                let mut out = out.with_family(rep.family);
                out.verdict = Some(rep.libermann_ok && rep.stretch_involutive);
                out.detail
                    .insert("libermann".into(), rep.libermann_ok.into());
                out.detail
                    .insert("stretch_involutive".into(), rep.stretch_involutive.into());
                out.non_constant_rank = Some(rep.pullback.non_constant_rank.is_some());
                out.detail.insert(
                    "non_constant_rank".into(),
                    rep.pullback.non_constant_rank.is_some().into(),
                );
                Ok(out)
            }
            "check_witness" => {
                let x = self.submanifold()?;
                let p = self.projection_on(Some(x), task.retained.as_ref())?;
                let e = self.witness()?.clone();
                let rep = check_witness(self.arg_family(task, 0)?, x, &p, &e, &probes(x.dim()))?;
                let mut out = out.with_verdict(rep.all_pass());
                out.wit = Some([rep.wit1, rep.wit2, rep.wit3]);
                out.detail.insert("wit1".into(), rep.wit1.into());
                out.detail.insert("wit2".into(), rep.wit2.into());
                out.detail.insert("wit3".into(), rep.wit3.into());
                Ok(out)
            }
            "check_mr" => {
                let name = self.arg(task, 0)?;
                let pi = self.lookup(name)?.bivector(name)?.clone();
                let rep = check_mr(&pi, self.submanifold()?, self.witness()?)?;
                let mut out = out;
                out.mr = Some([rep.mr1, rep.mr1prime, rep.mr2]);
                out.detail.insert("mr1".into(), rep.mr1.into());
                out.detail.insert("mr1prime".into(), rep.mr1prime.into());
                out.detail.insert("mr2".into(), rep.mr2.into());
                Ok(out)
            }
            "split_ranks" => {
                let x = self.submanifold()?;
                let ranks = split_ranks(self.arg_family(task, 0)?, x, &probes(x.dim()))?;
                let constant = ranks.iter().all(|(_, at, generic)| at == generic);
                let mut out = out.with_verdict(constant);
                out.detail.insert(
                    "ranks".into(),
                    ranks
                        .iter()
                        .map(|(_, at, _)| *at)
                        .collect::<Vec<_>>()
                        .into(),
                );
                Ok(out)
            }
            "magri_n" => {
                let f = magri_n(self.arg_family(task, 0)?, self.arg_family(task, 1)?)?;
                Ok(out.with_family(f))
            }
            "magri_m" => {
                let f = magri_m(self.arg_family(task, 0)?, self.arg_family(task, 1)?)?;
                Ok(out.with_family(f))
            }
            "diamond" => {
                let kind = match task.kind.as_deref().unwrap_or("kernel") {
                    "kernel" => DiamondKind::Kernel,
                    "magri" => DiamondKind::Magri,
                    other => return Err(doc_err(format!("unknown diamond kind '{other}'"))),
                };
                let rep = diamond(
                    self.arg_family(task, 0)?,
                    self.arg_family(task, 1)?,
                    kind,
                    self.seed,
                    self.probe_count,
                )?;
                let mut out = out.with_verdict(rep.verdict);
                let mut vertices = Vec::new();
                let mut detail = serde_json::Map::new();
                for v in rep.vertices {
                    detail.insert(
                        v.name.to_string(),
                        serde_json::json!({
                            "retained": v.retained.iter().map(|i| i + 1).collect::<Vec<_>>(),
                            "l": family_json(&v.l),
                            "r": family_json(&v.r),
                            "concur_weak": v.concur_weak,
                            "l_kernel_rank": v.l_kernel_rank,
                            "r_kernel_rank": v.r_kernel_rank,
                        }),
                    );
                    vertices.push((v.name.to_string(), v.retained, v.l, v.r));
                }
                out.detail.insert("vertices".into(), detail.into());
                out.vertices = Some(vertices);
                Ok(out)
            }
            "coordinate_change" => {
                let rows = task
                    .matrix
                    .as_ref()
                    .ok_or_else(|| doc_err("coordinate_change needs 'matrix'"))?;
                let a: Vec<Vec<Scalar>> = rows
                    .iter()
                    .map(|r| r.iter().map(|s| self.scalar(s)).collect())
                    .collect::<Result<_>>()?;
                let f = linear_coordinate_change(self.arg_family(task, 0)?, &a)?;
                Ok(out.with_family(f))
            }
            "shift" => {
                let side = match task.side.as_deref().unwrap_or("left") {
                    "left" => ShiftSide::Left,
                    "right" => ShiftSide::Right,
                    other => return Err(doc_err(format!("unknown shift side '{other}'"))),
                };
                let name = self.arg(task, 1)?;
                let n = self.lookup(name)?.endo(name)?.clone();
                let f = shift(self.arg_family(task, 0)?, &n, task.k.unwrap_or(1), side)?;
                Ok(out.with_family(f))
            }
            "is_dirac_nijenhuis" => {
                let name = self.arg(task, 1)?;
                let n = self.lookup(name)?.endo(name)?.clone();
                let rep = is_dirac_nijenhuis(self.arg_family(task, 0)?, &n)?;
                let mut out = out.with_verdict(rep.verdict()).with_residual(
                    rep.invariant_certificate
                        .or(rep.bracket_certificate)
                        .map(|c| c.residual),
                );
                out.detail.insert("invariant".into(), rep.invariant.into());
                out.detail.insert("bracket".into(), rep.bracket.into());
                Ok(out)
            }
            "is_nijenhuis" => {
                let name = self.arg(task, 0)?;
                let v = self.lookup(name)?.endo(name)?.is_nijenhuis()?;
                Ok(out.with_verdict(v))
            }
            "torsion" => {
                let idx = task
                    .indices
                    .as_ref()
                    .filter(|v| v.len() == 2)
                    .ok_or_else(|| doc_err("torsion needs 'indices' [i, j]"))?;
                let name = self.arg(task, 0)?;
                let ne = self.lookup(name)?.endo(name)?;
                let t = ne.torsion(
                    self.zero_based(idx[0], self.dim)?,
                    self.zero_based(idx[1], self.dim)?,
                )?;
                let mut out = out;
                out.detail.insert(
                    "vector".into(),
                    t.iter().map(|p| p.to_string()).collect::<Vec<_>>().into(),
                );
                out.vector = Some(t);
                Ok(out)
            }
            "dn_bracket_closed" => {
                // Is {generator, frame}_N ⊂ L for all coordinate generators?
                let l = self.arg_family(task, 0)?;
                let name = self.arg(task, 1)?;
                let ne = self.lookup(name)?.endo(name)?;
                let n = l.dim();
                let mut verdict = true;
                'outer: for gi in 0..2 * n {
                    let z = if gi < n {
                        GenSection::basis_vector(n, gi)
                    } else {
                        GenSection::basis_covector(n, gi - n)
                    };
                    for a in l.frame() {
                        if !l.contains(&dn_bracket(&z, a, ne)?) {
                            verdict = false;
                            break 'outer;
                        }
                    }
                }
                Ok(out.with_verdict(verdict))
            }
            "pn_check" => {
                let name = self.arg(task, 0)?;
                let pi = self.lookup(name)?.bivector(name)?;
                let endo_name = self.arg(task, 1)?;
                let v = pn_check(pi, self.lookup(endo_name)?.endo(endo_name)?)?;
                Ok(out.with_verdict(v))
            }
            "omega_n_check" => {
                let name = self.arg(task, 0)?;
                let w = self.lookup(name)?.two_form(name)?;
                let endo_name = self.arg(task, 1)?;
                let v = omega_n_check(w, self.lookup(endo_name)?.endo(endo_name)?)?;
                Ok(out.with_verdict(v))
            }
            other => Err(doc_err(format!("unknown op '{other}'"))),
        }
    }

    fn check_expect(&self, expect: &ExpectSpec, out: &Outcome) -> Result<Vec<String>> {
        let mut failures = Vec::new();
        if let Some(spec) = &expect.family {
            let got = out
                .family
                .as_ref()
                .ok_or_else(|| doc_err("'expect.family' on an op with no family result"))?;
            let dim = expect.dim.unwrap_or(got.dim());
            let want = self.instantiate(spec, dim)?;
            let want = want.family("expect")?;
            if !got.family_equal(want) {
                failures.push("family mismatch".to_string());
            }
        }
        if let Some(v) = expect.verdict {
            if out.verdict != Some(v) {
                failures.push(format!("verdict is {:?}, expected {v}", out.verdict));
            }
        }
        if let Some(r) = &expect.residual {
            let ok = match &out.residual {
                Some(got) => {
                    let want = self.poly(r, got.var_count())?;
                    *got == want || got.neg() == want
                }
                None => false,
            };
            if !ok {
                failures.push(format!(
                    "residual is {:?}, expected {r} (up to sign)",
                    out.residual.as_ref().map(|p| p.to_string())
                ));
            }
        }
        if let Some(p) = &expect.poly {
            let got = out
                .poly
                .as_ref()
                .ok_or_else(|| doc_err("'expect.poly' on an op with no polynomial result"))?;
            let want = self.poly(p, self.dim)?;
            if *got != want && got.neg() != want {
                failures.push(format!("polynomial is {got}, expected {want} (up to sign)"));
            }
        }
        if let Some(v) = &expect.vector {
            let got = out
                .vector
                .as_ref()
                .ok_or_else(|| doc_err("'expect.vector' on an op with no vector result"))?;
            let want = self.vector(v, got.len())?;
            if *got != want {
                failures.push("vector mismatch".to_string());
            }
        }
        if let Some(r) = expect.rank {
            if out.rank != Some(r) {
                failures.push(format!("rank is {:?}, expected {r}", out.rank));
            }
        }
        if let Some(f) = expect.non_constant_rank {
            if out.non_constant_rank != Some(f) {
                failures.push(format!(
                    "non_constant_rank is {:?}, expected {f}",
                    out.non_constant_rank
                ));
            }
        }
        for (label, want, got) in [
            ("wit1", expect.wit1, out.wit.map(|w| w[0])),
            ("wit2", expect.wit2, out.wit.map(|w| w[1])),
            ("wit3", expect.wit3, out.wit.map(|w| w[2])),
            ("mr1", expect.mr1, out.mr.map(|m| m[0])),
            ("mr1prime", expect.mr1prime, out.mr.map(|m| m[1])),
            ("mr2", expect.mr2, out.mr.map(|m| m[2])),
        ] {
            if let Some(w) = want {
                if got != Some(w) {
                    failures.push(format!("{label} is {got:?}, expected {w}"));
                }
            }
        }
        if let Some(vertices) = &expect.vertices {
            let got = out
                .vertices
                .as_ref()
                .ok_or_else(|| doc_err("'expect.vertices' on an op with no diamond result"))?;
            for (name, want) in vertices {
                let Some((_, retained, l, r)) = got.iter().find(|(n, ..)| n == name) else {
                    failures.push(format!("no diamond vertex named '{name}'"));
                    continue;
                };
                if let Some(want_retained) = &want.retained {
                    let got_1based: Vec<usize> = retained.iter().map(|i| i + 1).collect();
                    if got_1based != *want_retained {
                        failures.push(format!(
                            "vertex '{name}' retains {got_1based:?}, expected {want_retained:?}"
                        ));
                    }
                }
                for (side, fam, spec) in [("l", l, &want.l), ("r", r, &want.r)] {
                    if let Some(spec) = spec {
                        let want_fam = self.instantiate(spec, fam.dim())?;
                        if !fam.family_equal(want_fam.family("expect")?) {
                            failures.push(format!("vertex '{name}' side '{side}' mismatch"));
                        }
                    }
                }
            }
        }
        Ok(failures)
    }
}

/// Execute a document; `Err` signals an input error (exit code 2), a report
/// with failures signals expectation failure (exit code 1).
pub fn run(doc: &ProblemDocument, probe_count: usize, seed: u64) -> Result<Report> {
    let dim = doc.manifold.dim;
    let mut runner = Runner {
        mode: doc.manifold.field,
        dim,
        seed,
        probe_count,
        env: BTreeMap::new(),
        submanifold: None,
        projection: doc.projection.clone(),
        witness: None,
    };
    for (name, spec) in &doc.structures {
        let value = runner.instantiate(spec, dim)?;
        runner.env.insert(name.clone(), value);
    }
    let coord_key = |k: &str| -> Result<usize> {
        k.parse::<usize>()
            .map_err(|_| doc_err(format!("coordinate key '{k}' is not an index")))
    };
    runner.submanifold = match &doc.submanifold {
        Some(SubmanifoldSpec::Slice { fixed }) => {
            let mut map = BTreeMap::new();
            for (i, c) in fixed {
                map.insert(runner.zero_based(coord_key(i)?, dim)?, runner.scalar(c)?);
            }
            Some(Submanifold::slice(dim, map)?)
        }
        Some(SubmanifoldSpec::Graph { base, dependents }) => {
            let base = base
                .iter()
                .map(|&i| runner.zero_based(i, dim))
                .collect::<Result<Vec<_>>>()?;
            let mut map = BTreeMap::new();
            for (i, g) in dependents {
                map.insert(runner.zero_based(coord_key(i)?, dim)?, runner.poly(g, dim)?);
            }
            Some(Submanifold::graph(dim, base, map)?)
        }
        None => None,
    };
    runner.witness = match &doc.witness {
        Some(frame) => Some(
            frame
                .iter()
                .map(|v| runner.vector(v, dim))
                .collect::<Result<_>>()?,
        ),
        None => None,
    };

    let mut tasks = Vec::with_capacity(doc.tasks.len());
    let mut passed = 0;
    let mut failed = 0;
    for (index, task) in doc.tasks.iter().enumerate() {
        let out = runner
            .execute(task)
            .map_err(|e| doc_err(format!("task {} ({}): {e}", index + 1, task.op)))?;
        let status = match &task.expect {
            Some(expect) => {
                let failures = runner
                    .check_expect(expect, &out)
                    .map_err(|e| doc_err(format!("task {} ({}): {e}", index + 1, task.op)))?;
                if failures.is_empty() {
                    passed += 1;
                    "pass".to_string()
                } else {
                    failed += 1;
                    format!("fail: {}", failures.join("; "))
                }
            }
            None => "done".to_string(),
        };
        if let (Some(name), Some(fam)) = (&task.name, &out.family) {
            runner.env.insert(
                name.clone(),
                Value::Fam {
                    family: fam.clone(),
                    bivector: None,
                    two_form: None,
                },
            );
        }
        tasks.push(TaskReport {
            index: index + 1,
            op: task.op.clone(),
            name: task.name.clone(),
            status,
            detail: if out.detail.is_empty() {
                None
            } else {
                Some(serde_json::Value::Object(out.detail))
            },
        });
    }
    Ok(Report {
        source: doc.source.clone(),
        seed,
        probes: probe_count,
        tasks,
        passed,
        failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_json(json: &str) -> Result<Report> {
        let doc: ProblemDocument =
            serde_json::from_str(json).map_err(|e| doc_err(e.to_string()))?;
        run(&doc, 12, 0)
    }

    #[test]
    fn empty_task_list_passes() {
        let rep = run_json(r#"{ "manifold": {"dim": 2}, "tasks": [] }"#).unwrap();
        assert!(rep.all_passed());
        assert!(rep.tasks.is_empty());
    }

    #[test]
    fn product_with_expectation() {
        let rep = run_json(
            r#"{
              "manifold": {"dim": 2},
              "structures": {
                "A": {"type": "two_form_graph", "wedges": [{"i": 1, "j": 2, "coeff": "1"}]},
                "B": {"type": "two_form_graph", "wedges": [{"i": 1, "j": 2, "coeff": "2"}]}
              },
              "tasks": [
                {"op": "tangent_product", "args": ["A", "B"], "name": "S",
                 "expect": {"family": {"type": "two_form_graph", "wedges": [{"i": 1, "j": 2, "coeff": "3"}]}}},
                {"op": "family_equal", "args": ["S", "A"], "expect": {"verdict": false}}
              ]
            }"#,
        )
        .unwrap();
        assert!(rep.all_passed(), "{rep:?}");
    }

    #[test]
    fn undeclared_name_is_an_input_error() {
        let err = run_json(
            r#"{ "manifold": {"dim": 2},
                 "tasks": [{"op": "kernel", "args": ["nope"]}] }"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Document(_)), "{err:?}");
    }

    #[test]
    fn failing_expectation_is_reported_not_fatal() {
        let rep = run_json(
            r#"{
              "manifold": {"dim": 2},
              "structures": {
                "A": {"type": "tangent"}
              },
              "tasks": [
                {"op": "kernel", "args": ["A"], "expect": {"rank": 0}}
              ]
            }"#,
        )
        .unwrap();
        assert_eq!(rep.failed, 1);
        assert!(rep.tasks[0].status.starts_with("fail"));
    }
}
