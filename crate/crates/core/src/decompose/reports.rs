use serde::Serialize;

use super::signature::{certify_plot, replay_plot_certificate, PlotCertificate, Sources};
use super::standard::{close, columns, rule_sets, standardness, Standardness, StandardnessCertificate};
use super::witness::WitnessSet;
use super::{check_algebraic_sum, check_sum, certify_smooth_sum, DecompositionVerdict, SumStatus};
use crate::constraints::{characteristic_decomposition, dual_basis, isotropic_from_dual, CharacteristicDecomposition};
use crate::diffeology::{print_space, unit, DVSpace, LinearMap, Subspace};
use crate::error::{Error, Result};
use crate::expr::{ClassifyContext, Expr};
use crate::linalg::{self, Vector};
use crate::numbers::int;

fn push_unique(list: &mut Vec<String>, items: &[String]) {
    for a in items {
        if !list.contains(a) {
            list.push(a.clone());
        }
    }
}

/// `k`-element subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut vec![], &mut out);
    out
}

fn coord_subspace(n: usize, idx: &[usize]) -> Subspace {
    Subspace { ambient: n, basis: idx.iter().map(|&i| unit(n, i)).collect() }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum ComplementStatus {
    Complemented,
    NotComplemented,
    Unknown,
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct ComplementednessReport {
    pub subspace: Subspace,
    pub status: ComplementStatus,
    pub conditional: bool,
    pub axioms_used: Vec<String>,
    pub decomposition: Option<DecompositionVerdict>,
    pub standardness: Option<StandardnessCertificate>,
    pub isotropic: Option<Subspace>,
    pub reason: String,
}

/// Whether `W` splits off smoothly. A certified sum with some complement
/// proves it; a standard `W` meeting the maximal isotropic subspace cannot
/// split off, since the projection onto `W` followed by a coordinate of `W`
/// would be a smooth functional not vanishing on that intersection.
pub fn complementedness_report(
    v: &DVSpace,
    w: &Subspace,
    witnesses: &WitnessSet,
    ctx: &ClassifyContext,
) -> Result<ComplementednessReport> {
    let n = v.dim;
    if w.ambient != n {
        return Err(Error::Shape(format!("{w} is not a subspace of R^{n}")));
    }
    let mut rep = ComplementednessReport {
        subspace: w.clone(),
        status: ComplementStatus::Unknown,
        conditional: false,
        axioms_used: vec![],
        decomposition: None,
        standardness: None,
        isotropic: None,
        reason: String::new(),
    };
    let dual = dual_basis(v, ctx);
    let iso = dual.exact.then(|| isotropic_from_dual(n, &dual.basis));
    rep.isotropic = iso.clone();
    let mut candidates: Vec<Subspace> = Vec::new();
    if let Some(i) = &iso {
        candidates.push(i.clone());
    }
    if let Ok(c) = characteristic_decomposition(v, ctx) {
        candidates.push(c.v0);
    }
    for idx in subsets(n, n - w.dim()) {
        candidates.push(coord_subspace(n, &idx));
    }
    let mut seen: Vec<Subspace> = Vec::new();
    for c in candidates {
        if !check_algebraic_sum(n, w, &c) || seen.iter().any(|s| s.same_as(&c)) {
            continue;
        }
        seen.push(c.clone());
        let d = certify_smooth_sum(v, w, &c, witnesses)?;
        if d.status == SumStatus::SmoothCertified {
            rep.status = ComplementStatus::Complemented;
            rep.reason = format!("V = {w} (+) {c} is a certified smooth sum");
            rep.axioms_used = d.axioms_used.clone();
            rep.decomposition = Some(d);
            return Ok(rep);
        }
    }
    let s = standardness(v, w, witnesses, ctx);
    match (&iso, s.status) {
        (Some(i), Standardness::Standard) if w.intersection_dim(i) > 0 => {
            rep.status = ComplementStatus::NotComplemented;
            push_unique(&mut rep.axioms_used, &dual.system.axioms_used);
            push_unique(&mut rep.axioms_used, &s.axioms_used);
            rep.reason = format!(
                "{w} is standard and meets the maximal isotropic subspace {i}; a smooth projection onto it would give a smooth functional not vanishing there"
            );
        }
        (None, _) => {
            rep.reason = format!("no certified complement; the dual is not determined: {}", dual.system.incomplete.join("; "));
        }
        (_, st) => {
            rep.reason = format!("no certified complement among {} candidates; {w} is {st:?}", seen.len());
        }
    }
    rep.conditional = !rep.axioms_used.is_empty();
    rep.standardness = Some(s);
    Ok(rep)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum DecomposabilityStatus {
    Decomposable,
    NonDecomposable,
    Unknown,
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct DecomposabilityReport {
    pub status: DecomposabilityStatus,
    pub conditional: bool,
    pub axioms_used: Vec<String>,
    pub dual_dim: Option<usize>,
    pub isotropic: Option<Subspace>,
    pub characteristic: Option<CharacteristicDecomposition>,
    pub decomposition: Option<DecompositionVerdict>,
    /// The smooth splitting is asserted by a theorem rather than certified.
    pub trusted: Vec<String>,
    /// Other complements of the characteristic subspace, refuted.
    pub non_smooth_alternatives: Vec<DecompositionVerdict>,
    pub line_checks: Vec<StandardnessCertificate>,
    pub reason: String,
}

/// Lines of `R^2` whose standardness decides all lines: one line per
/// direction occurring in the generator columns, and two lines off all of
/// them. The closure rules only look at which relation entries vanish, and
/// off the column directions no entry vanishes, so one generic line stands
/// for all of them; a second one guards the argument.
fn representative_lines(dirs: &[Vector]) -> (Vec<Subspace>, Vec<Subspace>) {
    let mut special: Vec<Subspace> = Vec::new();
    for d in dirs {
        let l = Subspace::span(2, std::slice::from_ref(d));
        if !special.iter().any(|s| s.same_as(&l)) {
            special.push(l);
        }
    }
    let mut generic = Vec::new();
    let mut t = 1;
    while generic.len() < 2 {
        let u = vec![int(1), int(t)];
        let l = Subspace::span(2, &[u]);
        if !special.iter().any(|s| s.same_as(&l)) {
            generic.push(l);
        }
        t += 1;
    }
    (special, generic)
}

/// Whether `V` splits as a nontrivial smooth direct sum.
pub fn decomposability_report(v: &DVSpace, witnesses: &WitnessSet, ctx: &ClassifyContext) -> Result<DecomposabilityReport> {
    let n = v.dim;
    let dual = dual_basis(v, ctx);
    let iso = dual.exact.then(|| isotropic_from_dual(n, &dual.basis));
    let mut rep = DecomposabilityReport {
        status: DecomposabilityStatus::Unknown,
        conditional: false,
        axioms_used: vec![],
        dual_dim: dual.dim(),
        isotropic: iso.clone(),
        characteristic: None,
        decomposition: None,
        trusted: vec![],
        non_smooth_alternatives: vec![],
        line_checks: vec![],
        reason: String::new(),
    };
    if n == 1 {
        rep.status = DecomposabilityStatus::NonDecomposable;
        rep.reason = "a one-dimensional space has no nontrivial splitting".into();
        return Ok(rep);
    }
    if let Some(i) = &iso {
        if i.dim() > 0 && i.dim() < n {
            let c = characteristic_decomposition(v, ctx)?;
            let d = certify_smooth_sum(v, &c.v0, &c.v1, witnesses)?;
            rep.status = DecomposabilityStatus::Decomposable;
            push_unique(&mut rep.axioms_used, &c.axioms_used);
            if d.status != SumStatus::SmoothCertified {
                rep.trusted = c.trusted.clone();
            }
            rep.reason = format!(
                "0 < dim of the maximal isotropic subspace = {} < {n}: V = {} (+) {} with the characteristic subspace first",
                i.dim(),
                c.v0,
                c.v1
            );
            for idx in subsets(n, n - c.v0.dim()) {
                let alt = coord_subspace(n, &idx);
                if alt.same_as(&c.v1) || !check_algebraic_sum(n, &c.v0, &alt) {
                    continue;
                }
                let r = check_sum(v, &c.v0, &alt, witnesses, ctx)?;
                if r.status == SumStatus::NonSmooth {
                    push_unique(&mut rep.axioms_used, &r.axioms_used);
                    rep.non_smooth_alternatives.push(r);
                }
            }
            rep.decomposition = Some(d);
            rep.characteristic = Some(c);
            rep.conditional = !rep.axioms_used.is_empty();
            return Ok(rep);
        }
    }
    // certified splittings along coordinates, then along generator directions
    let mut pairs: Vec<(Subspace, Subspace)> = Vec::new();
    for k in 1..n {
        for idx in subsets(n, k) {
            if idx[0] != 0 {
                continue;
            }
            let rest: Vec<usize> = (0..n).filter(|i| !idx.contains(i)).collect();
            pairs.push((coord_subspace(n, &idx), coord_subspace(n, &rest)));
        }
    }
    let cols = Sources::new(v, &[]).map(|s| columns(&s.sigs));
    if n == 2 {
        if let Some(cols) = &cols {
            let mut lines: Vec<Subspace> = vec![coord_subspace(2, &[0]), coord_subspace(2, &[1])];
            for c in cols {
                let l = Subspace::span(2, std::slice::from_ref(&c.vector));
                if !lines.iter().any(|s| s.same_as(&l)) {
                    lines.push(l);
                }
            }
            for a in 0..lines.len() {
                for b in a + 1..lines.len() {
                    if a < 2 && b < 2 {
                        continue;
                    }
                    pairs.push((lines[a].clone(), lines[b].clone()));
                }
            }
        }
    }
    for (w0, w1) in pairs {
        let d = certify_smooth_sum(v, &w0, &w1, witnesses)?;
        if d.status == SumStatus::SmoothCertified {
            rep.status = DecomposabilityStatus::Decomposable;
            rep.reason = format!("V = {w0} (+) {w1} is a certified smooth sum");
            rep.decomposition = Some(d);
            return Ok(rep);
        }
    }
    let Some(i) = iso else {
        rep.reason = format!("no certified splitting; the dual is not determined: {}", dual.system.incomplete.join("; "));
        return Ok(rep);
    };
    if i.dim() != n || n != 2 {
        rep.reason = "no certified splitting, and the all-lines argument only covers the plane".into();
        return Ok(rep);
    }
    let Some(cols) = cols else {
        rep.reason = "no certified splitting; some generator is not a constant combination of atoms".into();
        return Ok(rep);
    };
    let (special, generic) = representative_lines(&cols.iter().map(|c| c.vector.clone()).collect::<Vec<_>>());
    let mut axioms = dual.system.axioms_used.clone();
    let mut all = true;
    for l in &generic {
        let ok = rule_sets(ctx).iter().any(|rules| {
            let cl = close(2, &cols, l, rules);
            cl.standard && cl.all_units
        });
        all &= ok;
    }
    for l in special.iter().chain(&generic) {
        let s = standardness(v, l, witnesses, ctx);
        all &= s.is_standard();
        push_unique(&mut axioms, &s.axioms_used);
        rep.line_checks.push(s);
    }
    if all {
        rep.status = DecomposabilityStatus::NonDecomposable;
        rep.axioms_used = axioms;
        rep.conditional = !rep.axioms_used.is_empty();
        rep.reason = "V has no nonzero smooth functional and every line is standard, so no line splits off".into();
    } else {
        rep.reason = "no certified splitting, and not every line is certified standard".into();
    }
    Ok(rep)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum KerImStatus {
    Diffeomorphic,
    NoDiffeomorphism,
    Unknown,
}

/// `T : Ker(f) x Im(f) -> V` with certificates that `T` and `T^-1` send
/// generators to plots.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct MatrixWitness {
    pub matrix: Vec<Vec<i64>>,
    pub product_space: String,
    pub forward: Vec<PlotCertificate>,
    pub backward: Vec<PlotCertificate>,
    pub searched: u64,
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct KerImReport {
    pub status: KerImStatus,
    pub conditional: bool,
    pub axioms_used: Vec<String>,
    pub map: String,
    pub kernel: Subspace,
    pub image: Subspace,
    pub witness: Option<MatrixWitness>,
    pub reason: String,
}

/// Entry order of the search: small magnitudes first.
const ENTRIES: [i64; 5] = [0, 1, -1, 2, -2];
const MAX_SEARCH_DIM: usize = 3;

fn to_rational(m: &[Vec<i64>]) -> Vec<Vector> {
    m.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
}

fn det_i64(m: &[Vec<i64>]) -> i64 {
    match m.len() {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => (0..m.len())
            .map(|j| {
                let minor: Vec<Vec<i64>> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, &x)| x).collect()).collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] * det_i64(&minor)
            })
            .sum(),
    }
}

fn inverse(m: &[Vector]) -> Option<Vec<Vector>> {
    let n = m.len();
    let cols: Vec<Vector> = (0..n).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect();
    // columns of the inverse solve M y = e_i
    let inv_cols: Vec<Vector> = (0..n).map(|i| linalg::solve_combination(&cols, &unit(n, i), n)).collect::<Option<_>>()?;
    Some((0..n).map(|r| inv_cols.iter().map(|c| c[r].clone()).collect()).collect())
}

/// Atom vectors of every generator mapped by `m` must lie in the span of
/// the target's atom vectors for the same atom.
fn atoms_fit(m: &[Vector], from: &[super::Signature], to_rows: &[Vector], to_keys: &[String], n: usize) -> bool {
    for s in from {
        let mut stacked: Vector = Vec::with_capacity(to_keys.len() * n);
        for k in to_keys {
            let v = s.vector(k, n);
            stacked.extend(m.iter().map(|r| linalg::dot(r, &v)));
        }
        if s.atoms.keys().any(|k| !to_keys.contains(k)) {
            return false;
        }
        let ok = if to_rows.is_empty() {
            linalg::is_zero_vector(&stacked)
        } else {
            linalg::solve_combination(to_rows, &stacked, to_keys.len() * n).is_some()
        };
        if !ok {
            return false;
        }
    }
    true
}

/// Compares `V` with `Ker(f) x Im(f)`, the kernel carrying its subset
/// diffeology (required standard) and the image the pushforward.
pub fn kernel_image_check(
    v: &DVSpace,
    f: &LinearMap,
    witnesses: &WitnessSet,
    ctx: &ClassifyContext,
) -> Result<KerImReport> {
    let n = v.dim;
    if f.ncols != n {
        return Err(Error::Shape(format!("map has {} columns, space has dimension {n}", f.ncols)));
    }
    let kernel = f.kernel();
    let image = f.image();
    let mut rep = KerImReport {
        status: KerImStatus::Unknown,
        conditional: false,
        axioms_used: vec![],
        map: f.to_string(),
        kernel: kernel.clone(),
        image: image.clone(),
        witness: None,
        reason: String::new(),
    };
    if kernel.dim() == 0 || image.dim() == 0 {
        rep.status = KerImStatus::Diffeomorphic;
        rep.reason = if kernel.dim() == 0 {
            "f is injective, so it is a diffeomorphism onto its image with the pushforward diffeology".into()
        } else {
            "f = 0, so Ker(f) = V and Im(f) = 0".into()
        };
        return Ok(rep);
    }
    let dec = decomposability_report(v, witnesses, ctx)?;
    if dec.status == DecomposabilityStatus::NonDecomposable {
        rep.status = KerImStatus::NoDiffeomorphism;
        rep.axioms_used = dec.axioms_used.clone();
        rep.conditional = !rep.axioms_used.is_empty();
        rep.reason = format!(
            "Ker(f) and Im(f) are both nonzero, so a diffeomorphism would split V smoothly, but {}",
            dec.reason
        );
        return Ok(rep);
    }
    let ks = standardness(v, &kernel, witnesses, ctx);
    if !ks.is_standard() {
        rep.reason = format!("Ker(f) = {kernel} is {:?}; only standard kernels are handled", ks.status);
        return Ok(rep);
    }
    if n > MAX_SEARCH_DIM {
        rep.reason = format!("matrix search is limited to dimension {MAX_SEARCH_DIM}");
        return Ok(rep);
    }
    push_unique(&mut rep.axioms_used, &ks.axioms_used);
    // product space: kernel coordinates first, then image coordinates
    let (_, pivots) = linalg::rref(&image.basis, image.ambient);
    let k = kernel.dim();
    let mut gens: Vec<Vec<Expr>> = Vec::new();
    for g in &v.generators {
        let y = f.apply_exprs(g);
        let mut p = vec![Expr::zero(); k];
        p.extend(pivots.iter().map(|&c| y[c].clone()));
        if p.iter().any(|e| !e.is_zero()) {
            gens.push(p);
        }
    }
    let prod = DVSpace::new(format!("Ker({})xIm({})", v.name, v.name), n, gens, vec![])?;
    let (Some(vsrc), Some(psrc)) = (Sources::new(v, &witnesses.derived), Sources::new(&prod, &[])) else {
        rep.reason = "some generator is not a constant combination of atoms".into();
        return Ok(rep);
    };
    let vkeys = vsrc.atom_keys(None);
    let pkeys = psrc.atom_keys(None);
    let vrows: Vec<Vector> = (0..vsrc.len()).map(|j| vsrc.stacked(j, &vkeys)).collect();
    let prows: Vec<Vector> = (0..psrc.len()).map(|j| psrc.stacked(j, &pkeys)).collect();
    let total = ENTRIES.len().pow((n * n) as u32);
    let mut searched = 0u64;
    for code in 0..total {
        searched += 1;
        let mut c = code;
        let mut flat = vec![0i64; n * n];
        for slot in flat.iter_mut().rev() {
            *slot = ENTRIES[c % ENTRIES.len()];
            c /= ENTRIES.len();
        }
        let m: Vec<Vec<i64>> = flat.chunks(n).map(<[i64]>::to_vec).collect();
        if det_i64(&m) == 0 {
            continue;
        }
        let t = to_rational(&m);
        if !atoms_fit(&t, &psrc.sigs, &vrows, &vkeys, n) {
            continue;
        }
        let tinv = inverse(&t).ok_or_else(|| Error::Internal("nonzero determinant without inverse".into()))?;
        if !atoms_fit(&tinv, &vsrc.sigs[..v.generators.len()], &prows, &pkeys, n) {
            continue;
        }
        let tmap = LinearMap::new(t.clone(), n)?;
        let imap = LinearMap::new(tinv, n)?;
        let forward: Option<Vec<PlotCertificate>> =
            prod.generators.iter().map(|g| certify_plot(v, &witnesses.derived, &tmap.apply_exprs(g))).collect();
        let backward: Option<Vec<PlotCertificate>> =
            v.generators.iter().map(|g| certify_plot(&prod, &[], &imap.apply_exprs(g))).collect();
        if let (Some(forward), Some(backward)) = (forward, backward) {
            rep.status = KerImStatus::Diffeomorphic;
            rep.conditional = !rep.axioms_used.is_empty();
            rep.reason = format!("T maps the generators of Ker(f) x Im(f) to plots of V and T^-1 maps back ({searched} matrices tried)");
            rep.witness = Some(MatrixWitness { matrix: m, product_space: print_space(&prod), forward, backward, searched });
            return Ok(rep);
        }
    }
    rep.reason = format!("no invertible integer matrix with entries in [-2,2] works ({searched} tried)");
    Ok(rep)
}

/// Re-checks a matrix witness: invertibility and every stored plot certificate.
pub fn replay_matrix_witness(v: &DVSpace, w: &MatrixWitness, witnesses: &WitnessSet) -> Result<()> {
    let prod = crate::diffeology::parse_space(&w.product_space)?;
    if det_i64(&w.matrix) == 0 {
        return Err(Error::Verification("witness matrix is singular".into()));
    }
    let t = LinearMap::new(to_rational(&w.matrix), v.dim)?;
    let tinv = LinearMap::new(inverse(&t.rows).ok_or_else(|| Error::Verification("singular".into()))?, v.dim)?;
    if w.forward.len() != prod.generators.len() || w.backward.len() != v.generators.len() {
        return Err(Error::Verification("certificates do not cover every generator".into()));
    }
    let same = |stored: &[String], want: &[Expr]| -> Result<bool> {
        let s: Vec<Expr> = stored.iter().map(|x| crate::expr::parse_expr(x)).collect::<Result<_>>()?;
        Ok(s.iter().zip(want).all(|(a, b)| (a.clone() - b.clone()).normalize().is_zero()))
    };
    for (g, c) in prod.generators.iter().zip(&w.forward) {
        if !same(&c.target, &t.apply_exprs(g))? {
            return Err(Error::Verification("forward certificate targets a different curve".into()));
        }
        replay_plot_certificate(v, &witnesses.derived, c)?;
    }
    for (g, c) in v.generators.iter().zip(&w.backward) {
        if !same(&c.target, &tinv.apply_exprs(g))? {
            return Err(Error::Verification("backward certificate targets a different curve".into()));
        }
        replay_plot_certificate(&prod, &[], c)?;
    }
    Ok(())
}
