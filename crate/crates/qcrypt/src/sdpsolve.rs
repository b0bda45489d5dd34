//! Dense semidefinite programs in standard form.
//!
//! Primal: maximize Tr(CM) subject to Tr(A_i M) = b_i, M ⪰ 0.
//! Dual: minimize Σ λ_i b_i subject to Σ λ_i A_i − C ⪰ 0.
//!
//! The solver is a primal-dual path-following method on the HKM search
//! direction. Complex data is embedded as real symmetric matrices of twice the
//! size, and the variable is split into the independent diagonal blocks implied
//! by the joint sparsity pattern of C and the A_i.

use serde_json::{json, Value};

use crate::error::{dim_err, invalid, Error, Result};
use crate::matcore::{jacobi_symmetric, ComplexMatrix, HermitianMatrix, RealMatrix, C64};

const MAX_ITER: usize = 200;
const SIGMA: f64 = 0.3;
const STEP_FRACTION: f64 = 0.95;

/// max Tr(CM) s.t. Tr(A_i M) = b_i, M ⪰ 0.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    c: HermitianMatrix,
    constraints: Vec<(HermitianMatrix, f64)>,
}

impl SdpProblem {
    pub fn new(c: HermitianMatrix, constraints: Vec<(HermitianMatrix, f64)>) -> Result<Self> {
        let d = c.dim();
        if d == 0 {
            return dim_err("empty objective");
        }
        for (a, b) in &constraints {
            if a.dim() != d {
                return dim_err(format!("constraint of dim {} for objective of dim {d}", a.dim()));
            }
            if !b.is_finite() {
                return invalid("non-finite right-hand side");
            }
        }
        Ok(Self { c, constraints })
    }

    pub fn objective(&self) -> &HermitianMatrix {
        &self.c
    }

    pub fn constraints(&self) -> &[(HermitianMatrix, f64)] {
        &self.constraints
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }

    pub fn to_json_value(&self) -> Value {
        let cons: Vec<Value> =
            self.constraints.iter().map(|(a, b)| json!({ "A": a.to_json_value(), "b": b })).collect();
        json!({ "C": self.c.to_json_value(), "constraints": cons })
    }

    pub fn from_json_value(v: Value) -> Result<Self> {
        let Value::Object(mut obj) = v else {
            return invalid("SDP problem must be a JSON object");
        };
        let c = obj.remove("C").ok_or_else(|| Error::Invalid("missing field C".into()))?;
        let c = HermitianMatrix::new(ComplexMatrix::from_json_value(c)?)?;
        let mut constraints = Vec::new();
        if let Some(Value::Array(list)) = obj.remove("constraints") {
            for item in list {
                let Value::Object(mut o) = item else {
                    return invalid("constraint must be an object");
                };
                let a = o.remove("A").ok_or_else(|| Error::Invalid("constraint missing A".into()))?;
                let b =
                    o.get("b").and_then(Value::as_f64).ok_or_else(|| Error::Invalid("constraint missing b".into()))?;
                constraints.push((HermitianMatrix::new(ComplexMatrix::from_json_value(a)?)?, b));
            }
        }
        Self::new(c, constraints)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json_value(serde_json::from_str(s)?)
    }
}

/// Primal-dual pair returned by [`solve`].
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub primal: HermitianMatrix,
    pub dual: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub iterations: usize,
}

/// Real symmetric problem on a block-diagonal variable.
struct BlockSdp {
    sizes: Vec<usize>,
    c: Vec<RealMatrix>,
    /// Per constraint: (block, row, col, value), both triangles listed.
    a: Vec<Vec<(usize, usize, usize, f64)>>,
    b: Vec<f64>,
}

struct Embedding {
    complex: bool,
    /// Real index → (block, local index).
    place: Vec<Option<(usize, usize)>>,
    n: usize,
}

fn realify(h: &ComplexMatrix, complex: bool) -> RealMatrix {
    let d = h.rows();
    if !complex {
        return RealMatrix::from_fn(d, |i, j| h[(i, j)].re);
    }
    RealMatrix::from_fn(2 * d, |i, j| {
        let z = h[(i % d, j % d)];
        let v = match (i < d, j < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        };
        0.5 * v
    })
}

fn components(n: usize, mats: &[&RealMatrix]) -> Vec<Option<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut touched = vec![false; n];
    for m in mats {
        for i in 0..n {
            for j in i..n {
                if m.get(i, j) != 0.0 || m.get(j, i) != 0.0 {
                    touched[i] = true;
                    touched[j] = true;
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut label = vec![None; n];
    let mut next = 0;
    let mut root_label = vec![None; n];
    for i in 0..n {
        if !touched[i] {
            continue;
        }
        let r = find(&mut parent, i);
        let l = *root_label[r].get_or_insert_with(|| {
            next += 1;
            next - 1
        });
        label[i] = Some(l);
    }
    label
}

fn build(p: &SdpProblem) -> (BlockSdp, Embedding) {
    let complex = !p.c.is_real(0.0) || p.constraints.iter().any(|(a, _)| !a.is_real(0.0));
    let c = realify(&p.c, complex);
    let a: Vec<RealMatrix> = p.constraints.iter().map(|(m, _)| realify(m, complex)).collect();
    let n = c.n();
    let mut mats: Vec<&RealMatrix> = vec![&c];
    mats.extend(a.iter());
    let label = components(n, &mats);
    let nblocks = label.iter().flatten().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0; nblocks];
    let mut place = vec![None; n];
    for i in 0..n {
        if let Some(l) = label[i] {
            place[i] = Some((l, sizes[l]));
            sizes[l] += 1;
        }
    }
    let mut cb: Vec<RealMatrix> = sizes.iter().map(|&s| RealMatrix::zeros(s)).collect();
    for i in 0..n {
        for j in 0..n {
            if let (Some((bi, li)), Some((_, lj))) = (place[i], place[j]) {
                let v = c.get(i, j);
                if v != 0.0 {
                    cb[bi].set(li, lj, v);
                }
            }
        }
    }
    let ab = a
        .iter()
        .map(|m| {
            let mut e = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let v = m.get(i, j);
                    if v != 0.0 {
                        let ((bi, li), (_, lj)) = (place[i].unwrap(), place[j].unwrap());
                        e.push((bi, li, lj, v));
                    }
                }
            }
            e
        })
        .collect();
    let b = p.constraints.iter().map(|(_, b)| *b).collect();
    (BlockSdp { sizes, c: cb, a: ab, b }, Embedding { complex, place, n })
}

impl BlockSdp {
    fn apply_a(&self, x: &[RealMatrix]) -> Vec<f64> {
        self.a.iter().map(|e| e.iter().map(|&(b, r, c, v)| v * x[b].get(c, r)).sum()).collect()
    }

    fn apply_at(&self, y: &[f64]) -> Vec<RealMatrix> {
        let mut out: Vec<RealMatrix> = self.sizes.iter().map(|&s| RealMatrix::zeros(s)).collect();
        for (e, &yi) in self.a.iter().zip(y) {
            for &(b, r, c, v) in e {
                out[b].add_at(r, c, yi * v);
            }
        }
        out
    }

    fn objective(&self, x: &[RealMatrix]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c.dot(x)).sum()
    }

    fn dual_objective(&self, y: &[f64]) -> f64 {
        self.b.iter().zip(y).map(|(b, y)| b * y).sum()
    }

    /// M_ij = Tr(A_i X A_j Z⁻¹)
    fn schur(&self, x: &[RealMatrix], zinv: &[RealMatrix]) -> RealMatrix {
        let m = self.a.len();
        let mut s = RealMatrix::zeros(m);
        for i in 0..m {
            for j in i..m {
                let mut acc = 0.0;
                for &(bi, r, c, a) in &self.a[i] {
                    for &(bj, q, t, v) in &self.a[j] {
                        if bi == bj {
                            acc += a * v * x[bi].get(c, q) * zinv[bi].get(t, r);
                        }
                    }
                }
                s.set(i, j, acc);
                s.set(j, i, acc);
            }
        }
        s
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn blocks_norm(x: &[RealMatrix]) -> f64 {
    x.iter().map(|m| m.dot(m)).sum::<f64>().sqrt()
}

/// Largest α ≤ 1/0.95 keeping X + α dX positive definite.
fn max_step(x: &RealMatrix, dx: &RealMatrix) -> Result<f64> {
    let li = x.cholesky()?.lower_inverse();
    let s = li.matmul(dx).matmul(&li.transpose());
    let (vals, _) = jacobi_symmetric(&s);
    let lmin = vals.first().copied().unwrap_or(0.0);
    Ok(if lmin >= -1e-300 { f64::INFINITY } else { -1.0 / lmin })
}

/// Solves the problem to relative gap and residuals below `tol`.
pub fn solve(p: &SdpProblem, tol: f64) -> Result<SdpSolution> {
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let (sdp, emb) = build(p);
    let m = sdp.a.len();
    let nb = sdp.sizes.len();
    let ntot: usize = sdp.sizes.iter().sum();
    if ntot == 0 {
        return invalid("problem has no variables");
    }
    let mut x: Vec<RealMatrix> = sdp.sizes.iter().map(|&s| RealMatrix::identity(s)).collect();
    let mut z = x.clone();
    let mut y = vec![0.0; m];
    let bnorm = 1.0 + norm2(&sdp.b);
    let cnorm = 1.0 + blocks_norm(&sdp.c);
    let mut best_rp = f64::INFINITY;
    let mut stall = 0;

    for iter in 0..MAX_ITER {
        let ax = sdp.apply_a(&x);
        let rp: Vec<f64> = sdp.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = sdp.apply_at(&y);
        let rd: Vec<RealMatrix> = (0..nb).map(|k| sdp.c[k].add(&z[k]).sub(&aty[k])).collect();
        let pobj = sdp.objective(&x);
        let dobj = sdp.dual_objective(&y);
        let mu = x.iter().zip(&z).map(|(a, b)| a.dot(b)).sum::<f64>() / ntot as f64;
        let rel_gap = (dobj - pobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let prim_inf = norm2(&rp) / bnorm;
        let dual_inf = blocks_norm(&rd) / cnorm;
        let compl = mu * ntot as f64 / (1.0 + pobj.abs() + dobj.abs());

        if rel_gap < tol && prim_inf < tol && dual_inf < tol && compl < tol {
            return Ok(finish(p, &sdp, &emb, &x, &y, iter));
        }
        if !blocks_norm(&x).is_finite() || blocks_norm(&x) > 1e12 {
            return Err(Error::Infeasible("primal iterates diverge; the problem looks unbounded".into()));
        }
        if prim_inf < 0.5 * best_rp {
            best_rp = prim_inf;
            stall = 0;
        } else if prim_inf > tol {
            stall += 1;
            if stall > 40 {
                return Err(Error::Infeasible(format!("primal residual stalled at {prim_inf:.3e}")));
            }
        }

        let zinv: Vec<RealMatrix> = z.iter().map(|zk| zk.spd_inverse()).collect::<Result<_>>()?;
        let target = SIGMA * mu;
        let g: Vec<RealMatrix> =
            (0..nb).map(|k| zinv[k].scale(target).sub(&x[k]).add(&x[k].matmul(&rd[k]).matmul(&zinv[k]))).collect();
        let ag = sdp.apply_a(&g);
        let rhs: Vec<f64> = ag.iter().zip(&rp).map(|(a, r)| a - r).collect();
        let schur = sdp.schur(&x, &zinv);
        let dy = match schur.spd_solve(&rhs) {
            Ok(v) => v,
            Err(_) => {
                let shift = 1e-12 * (1.0 + schur.trace() / m.max(1) as f64);
                let reg = schur.add(&RealMatrix::identity(m).scale(shift));
                reg.spd_solve(&rhs)
                    .map_err(|_| Error::Infeasible("Schur complement is singular; constraints are dependent".into()))?
            }
        };
        let atdy = sdp.apply_at(&dy);
        let dz: Vec<RealMatrix> = (0..nb).map(|k| atdy[k].sub(&rd[k])).collect();
        let dx: Vec<RealMatrix> = (0..nb)
            .map(|k| zinv[k].scale(target).sub(&x[k]).sub(&x[k].matmul(&dz[k]).matmul(&zinv[k])).symmetrized())
            .collect();

        let mut ap = f64::INFINITY;
        let mut ad = f64::INFINITY;
        for k in 0..nb {
            ap = ap.min(max_step(&x[k], &dx[k])?);
            ad = ad.min(max_step(&z[k], &dz[k])?);
        }
        let ap = (STEP_FRACTION * ap).min(1.0);
        let ad = (STEP_FRACTION * ad).min(1.0);
        for k in 0..nb {
            x[k] = x[k].axpy(ap, &dx[k]);
            z[k] = z[k].axpy(ad, &dz[k]);
        }
        for (yi, d) in y.iter_mut().zip(&dy) {
            *yi += ad * d;
        }
    }
    Err(Error::NotConverged(format!("no convergence within {MAX_ITER} iterations")))
}

fn finish(
    p: &SdpProblem,
    sdp: &BlockSdp,
    emb: &Embedding,
    x: &[RealMatrix],
    y: &[f64],
    iterations: usize,
) -> SdpSolution {
    let full = RealMatrix::from_fn(emb.n, |i, j| match (emb.place[i], emb.place[j]) {
        (Some((bi, li)), Some((bj, lj))) if bi == bj => x[bi].get(li, lj),
        _ => 0.0,
    });
    let d = p.dim();
    let m = if emb.complex {
        ComplexMatrix::from_fn(d, d, |i, j| {
            let re = 0.5 * (full.get(i, j) + full.get(i + d, j + d));
            let im = 0.5 * (full.get(i + d, j) - full.get(i, j + d));
            C64::new(re, im)
        })
    } else {
        ComplexMatrix::from_fn(d, d, |i, j| C64::new(full.get(i, j), 0.0))
    };
    let primal = HermitianMatrix::from_any(&m);
    let primal_value = primal.trace_product(p.c.matrix()).re;
    let dual_value = sdp.dual_objective(y);
    SdpSolution { primal, dual: y.to_vec(), primal_value, dual_value, gap: dual_value - primal_value, iterations }
}

/// Feasibility residuals and duality gap of a candidate pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub primal_residual: f64,
    pub primal_min_eigenvalue: f64,
    pub dual_min_eigenvalue: f64,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub feasible_primal: bool,
    pub feasible_dual: bool,
    pub optimal: bool,
}

/// Checks Tr(A_iM) = b_i, M ⪰ 0, Σλ_iA_i − C ⪰ 0 and the gap Σλ_ib_i − Tr(CM).
pub fn verify_certificate(
    p: &SdpProblem,
    primal: &HermitianMatrix,
    dual: &[f64],
    tol: f64,
) -> Result<CertificateReport> {
    if primal.dim() != p.dim() {
        return dim_err(format!("primal of dim {} for problem of dim {}", primal.dim(), p.dim()));
    }
    if dual.len() != p.constraints.len() {
        return dim_err(format!("{} dual values for {} constraints", dual.len(), p.constraints.len()));
    }
    let primal_residual = p.constraints.iter().map(|(a, b)| (a.trace_product(primal).re - b).abs()).fold(0.0, f64::max);
    let primal_min_eigenvalue = primal.min_eigenvalue();
    let mut s = p.c.scale(-1.0);
    for ((a, _), l) in p.constraints.iter().zip(dual) {
        s = s.add(&a.scale(*l));
    }
    let dual_min_eigenvalue = s.min_eigenvalue();
    let primal_value = primal.trace_product(p.c.matrix()).re;
    let dual_value: f64 = p.constraints.iter().zip(dual).map(|((_, b), l)| b * l).sum();
    let gap = dual_value - primal_value;
    let feasible_primal = primal_residual <= tol && primal_min_eigenvalue >= -tol;
    let feasible_dual = dual_min_eigenvalue >= -tol;
    Ok(CertificateReport {
        primal_residual,
        primal_min_eigenvalue,
        dual_min_eigenvalue,
        primal_value,
        dual_value,
        gap,
        feasible_primal,
        feasible_dual,
        optimal: feasible_primal && feasible_dual && gap.abs() <= tol,
    })
}

/// Vectors x_i with x_i·x_j = G_ij, from the eigendecomposition of G.
pub fn gram_factorize(g: &HermitianMatrix, tol: f64) -> Result<Vec<Vec<f64>>> {
    if !g.is_real(tol) {
        return invalid("Gram matrix must be real");
    }
    let d = g.dim();
    let r = RealMatrix::from_fn(d, |i, j| g[(i, j)].re);
    let (vals, vecs) = jacobi_symmetric(&r);
    if vals.first().is_some_and(|&l| l < -tol) {
        return invalid(format!("Gram matrix has eigenvalue {:.3e}", vals[0]));
    }
    let kept: Vec<usize> = (0..d).rev().filter(|&k| vals[k] > tol).collect();
    Ok((0..d).map(|i| kept.iter().map(|&k| vals[k].sqrt() * vecs.get(i, k)).collect()).collect())
}

/// Gram problem max ½Tr(GW) s.t. G_ii = 1, with W = [[0, A], [Aᵀ, 0]].
///
/// The objective equals Σ_st A_st x_s·y_t for unit vectors x_s, y_t.
pub fn gram_problem(a: &[Vec<f64>]) -> Result<SdpProblem> {
    let ns = a.len();
    let nt = a.first().map_or(0, |r| r.len());
    if ns == 0 || nt == 0 || a.iter().any(|r| r.len() != nt) {
        return dim_err("correlation matrix must be a nonempty rectangle");
    }
    let w = correlation_weights(a);
    let d = ns + nt;
    let constraints = (0..d)
        .map(|i| {
            let mut e = ComplexMatrix::zeros(d, d);
            e[(i, i)] = C64::new(1.0, 0.0);
            (HermitianMatrix::from_any(&e), 1.0)
        })
        .collect();
    SdpProblem::new(HermitianMatrix::from_any(&w.scale(0.5)), constraints)
}

/// W = [[0, A], [Aᵀ, 0]]
pub fn correlation_weights(a: &[Vec<f64>]) -> ComplexMatrix {
    let ns = a.len();
    let nt = a[0].len();
    let d = ns + nt;
    ComplexMatrix::from_fn(d, d, |i, j| {
        let v = if i < ns && j >= ns {
            a[i][j - ns]
        } else if i >= ns && j < ns {
            a[j][i - ns]
        } else {
            0.0
        };
        C64::new(v, 0.0)
    })
}

/// Gram matrix of the concatenated vector lists.
pub fn gram_matrix(vectors: &[Vec<f64>]) -> HermitianMatrix {
    let n = vectors.len();
    HermitianMatrix::from_any(&ComplexMatrix::from_fn(n, n, |i, j| {
        C64::new(vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum(), 0.0)
    }))
}
