//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines are always printed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cartan_nf::cartan::{check_auto_normalization, decompose_over_module};
use cartan_nf::families::{conjugated_family, integrable_pair, random_first_integral, random_jet, two_variable_example, FamilyConfig};
use cartan_nf::hamiltonian::{run_ito, verify_action_normal_form};
use cartan_nf::normalizer::newton::d_tilde;
use cartan_nf::normalizer::{
    diagonalize_linear_part, newton_step, normalize_family, poincare_dulac_normalize, Gauge, Mode, NewtonState,
    NormalizeOptions,
};
use cartan_nf::scalar::factorial;
use cartan_nf::{Arith, FormalSeries, JetDiffeo, LieMorphism, MultiIndex, Scalar, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ITO: &[&[i64]] = &[&[1, 0, -1, 0], &[0, 1, 0, -1]];
const TRIPLE: &[&[i64]] = &[&[1, 0, -1], &[0, 1, -1]];

struct Outcome {
    pass: bool,
    detail: String,
}

/// `"0 failures"`, or the count and the first one.
fn failures(what: &str, v: &[String]) -> String {
    match v.first() {
        None => format!("0 {what}"),
        Some(f) => format!("{} {what}, first: {f}", v.len()),
    }
}

fn ex() -> Arith {
    Arith::Exact
}

fn morphism(rows: &[&[i64]]) -> LieMorphism {
    LieMorphism::from_ints(rows, ex()).expect("valid rows")
}

fn within(t: Duration, limit_s: f64) -> bool {
    t.as_secs_f64() < limit_s
}

// ---------------------------------------------------------------- 1

fn two_variable() -> Outcome {
    let t = Instant::now();
    let a = ex();
    let cap = 13;
    let x = two_variable_example(cap);
    let target = VectorField::new(vec![
        FormalSeries::from_ints(2, cap, a, &[(&[2, 0], 1)]),
        FormalSeries::from_ints(2, cap, a, &[(&[0, 1], 1)]),
    ])
    .unwrap();

    // y1 = y + Σ_{k=1}^{12} (k−1)! x^k, old coordinates to new
    let mut y1 = FormalSeries::var(2, cap, a, 1);
    for k in 1..=12u32 {
        y1.add_term(MultiIndex::new(&[k, 0]), factorial(&a, k - 1));
    }
    let psi = JetDiffeo::from_components(vec![FormalSeries::var(2, cap, a, 0), y1.clone()]).unwrap();
    let phi = psi.invert().unwrap();
    let got = phi.pullback(&x).unwrap();
    let through_12 = got.eq_mod(&target, 12);
    // the truncated sum leaves exactly 12!·x1^13 ∂y1
    let residual = &got - &target;
    let expected = VectorField::monomial(2, cap, a, MultiIndex::new(&[13, 0]), 1, factorial(&a, 12));
    let top = residual == expected;

    // the same sum read as the new-to-old map does not normalize
    let literal = JetDiffeo::from_components(vec![FormalSeries::var(2, cap, a, 0), y1]).unwrap();
    let literal_ok = literal.pullback(&x).unwrap().eq_mod(&target, 12);

    // stepwise normalization of the diagonalized field
    let pd_cap = 10;
    let (p, _) = diagonalize_linear_part(&x.with_cap(pd_cap)).unwrap();
    let diag = p.pullback(&x.with_cap(pd_cap)).unwrap();
    let pd = poincare_dulac_normalize(&diag, &diag.jet(1), pd_cap, Gauge::ZeroOnKernel).unwrap();
    let forward = pd.phi.invert().unwrap();
    let coeffs_ok = (2..=10u32).all(|k| forward.components()[1].coeff_of(&[k, 0]) == factorial(&a, k - 1));
    let nf_ok = pd.nf == target.with_cap(pd_cap);

    let el = t.elapsed();
    Outcome {
        pass: through_12 && top && coeffs_ok && nf_ok && !literal_ok && within(el, 1.0),
        detail: format!(
            "identity mod 13 {through_12}, degree-13 residual 12!x^13 {top}, (k-1)! for k=2..10 {coeffs_ok}, \
             nf {nf_ok}, sum as new-to-old map normalizes {literal_ok}, {:.2}s",
            el.as_secs_f64()
        ),
    }
}

// ---------------------------------------------------------------- 2

struct StepCase {
    rows: &'static [&'static [i64]],
    orders: &'static [usize],
    m: usize,
    count: u64,
}

fn newton_doubling() -> Outcome {
    let t = Instant::now();
    let cases = [
        StepCase { rows: &[&[1, -1]], orders: &[1], m: 2, count: 4 },
        StepCase { rows: &[&[1, -1]], orders: &[1], m: 4, count: 4 },
        StepCase { rows: &[&[1, -1]], orders: &[1], m: 8, count: 4 },
        StepCase { rows: &[&[1, -1]], orders: &[1], m: 16, count: 2 },
        StepCase { rows: &[&[1, 2, -3]], orders: &[1], m: 2, count: 4 },
        StepCase { rows: &[&[1, 2, -3]], orders: &[1], m: 4, count: 4 },
        StepCase { rows: &[&[1, 2, -3]], orders: &[1], m: 8, count: 4 },
        StepCase { rows: ITO, orders: &[1, 1], m: 2, count: 6 },
        StepCase { rows: ITO, orders: &[1, 1], m: 4, count: 6 },
        StepCase { rows: ITO, orders: &[1, 3], m: 2, count: 6 },
        StepCase { rows: ITO, orders: &[1, 3], m: 4, count: 6 },
        StepCase { rows: TRIPLE, orders: &[1, 1], m: 2, count: 3 },
        StepCase { rows: TRIPLE, orders: &[1, 1], m: 4, count: 3 },
    ];
    let mut families = 0;
    let mut nontrivial = 0;
    let mut bad = Vec::new();
    for c in &cases {
        let s = morphism(c.rows);
        let dmax = *c.orders.iter().max().unwrap();
        let cap = 2 * c.m + dmax - 1;
        for seed in 0..c.count {
            let cfg = FamilyConfig {
                cap,
                orders: c.orders.to_vec(),
                jet_lo: c.m + 1,
                jet_hi: c.m + 3,
                jet_terms: 3,
            };
            let fam = match conjugated_family(&s, &cfg, 1000 * c.m as u64 + seed) {
                Ok(f) => f,
                Err(e) => {
                    bad.push(format!("{:?} m={} seed {seed}: {e}", c.rows, c.m));
                    continue;
                }
            };
            families += 1;
            let id = JetDiffeo::identity(s.n(), cap, ex());
            let state = NewtonState::new(fam.x.clone(), c.m, id).unwrap();
            let next = match newton_step(&state, &s) {
                Ok(n) => n,
                Err(e) => {
                    bad.push(format!("{:?} m={} seed {seed}: {e}", c.rows, c.m));
                    continue;
                }
            };
            let u = next.psi.nonlinear_part();
            if !u.is_zero() {
                nontrivial += 1;
            }
            for (i, &d) in c.orders.iter().enumerate() {
                let top = 2 * c.m + d - 1;
                let normal = s.nonzero_weight_part(&next.fields[i].jet(top)).is_zero();
                let nf = state.fields[i].jet(c.m + d - 1);
                let rem = &state.fields[i] - &nf;
                let eq = &rem + &u.bracket(&nf).unwrap();
                let residual = s.nonzero_weight_part(&eq.jet(top)).is_zero();
                let conj = next.psi.pullback(&fam.x[i]).unwrap() == next.fields[i];
                if !(normal && residual && conj) {
                    bad.push(format!(
                        "{:?} m={} seed {seed} field {i}: normal {normal} residual {residual} conjugation {conj}",
                        c.rows, c.m
                    ));
                }
            }
        }
    }
    let el = t.elapsed();
    Outcome {
        pass: families >= 50 && bad.is_empty() && within(el, 60.0),
        detail: format!(
            "{families} families ({nontrivial} with a nonzero correction), {}, {:.1}s",
            failures("failures", &bad),
            el.as_secs_f64()
        ),
    }
}

// ---------------------------------------------------------------- 3

fn oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let cases: [(&[&[i64]], &[usize], usize); 5] = [
        (&[&[1, -1]], &[1], 16),
        (&[&[1, 2, -3]], &[1], 12),
        (ITO, &[1, 1], 8),
        (ITO, &[1, 3], 10),
        (TRIPLE, &[1, 1], 8),
    ];
    let mut runs = 0;
    let mut bad = Vec::new();
    for (rows, orders, cap) in cases {
        let s = morphism(rows);
        for seed in 0..2u64 {
            let cfg = FamilyConfig {
                cap,
                orders: orders.to_vec(),
                jet_lo: 2,
                jet_hi: 4,
                jet_terms: 4,
            };
            let fam = conjugated_family(&s, &cfg, 77 + seed).unwrap();
            for mode in [Mode::Stepwise, Mode::Newton] {
                runs += 1;
                let out = match normalize_family(&fam.x, &s, &NormalizeOptions::new(cap, mode)) {
                    Ok(o) => o,
                    Err(e) => {
                        bad.push(format!("{rows:?} {mode} seed {seed}: {e}"));
                        continue;
                    }
                };
                let normal = out.nf.iter().all(|f| s.nonzero_weight_part(f).is_zero());
                let conj = fam
                    .x
                    .iter()
                    .zip(&out.nf)
                    .all(|(x, f)| out.psi.pullback(x).unwrap() == *f);
                if !(normal && conj) {
                    bad.push(format!("{rows:?} {mode} seed {seed}: normal {normal} conjugation {conj}"));
                }
            }
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!("{runs} runs, {}, {:.1}s", failures("failures", &bad), t.elapsed().as_secs_f64()),
    }
}

// ---------------------------------------------------------------- 4

fn random_field(n: usize, cap: usize, terms: usize, rng: &mut ChaCha8Rng) -> VectorField {
    let a = ex();
    let pool = MultiIndex::all_in_range(n, 0, cap);
    let mut v = VectorField::zero(n, cap, a);
    for _ in 0..terms {
        let q = pool[rng.gen_range(0..pool.len())];
        let i = rng.gen_range(0..n);
        v = &v + &VectorField::monomial(n, cap, a, q, i, a.int(rng.gen_range(-5..=5)));
    }
    v
}

fn algebraic_identities() -> Outcome {
    let mut decs = 0;
    let mut cofactor_bad = 0;
    let mut nil_inputs = 0;
    let mut nil_bad = 0;
    let mut certified = 0;
    let mut ord_bad = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cases: [(&[&[i64]], &[usize], usize); 4] = [
        (ITO, &[1, 1], 7),
        (ITO, &[1, 3], 7),
        (TRIPLE, &[1, 1], 7),
        (&[&[1, 2, -3]], &[1], 7),
    ];
    for (rows, orders, cap) in cases {
        let s = morphism(rows);
        for seed in 0..4u64 {
            let cfg = FamilyConfig {
                cap,
                orders: orders.to_vec(),
                jet_lo: 2,
                jet_hi: 3,
                jet_terms: 1,
            };
            let fam = conjugated_family(&s, &cfg, 500 + seed).unwrap();
            let dec = decompose_over_module(&fam.nf, &s).unwrap();
            decs += 1;
            let l = dec.l();
            // C·A against det·Id, multiplied out by hand
            for i in 0..l {
                for k in 0..l {
                    let mut acc = FormalSeries::zero(s.n(), dec.det.cap(), ex());
                    for j in 0..l {
                        acc = &acc + &(&dec.cofactor[i][j] * &dec.a[j][k]);
                    }
                    let want = if i == k { dec.det.clone() } else { FormalSeries::zero(s.n(), dec.det.cap(), ex()) };
                    if acc != want {
                        cofactor_bad += 1;
                    }
                }
            }
            let cert = dec.certificate();
            if cert.cartan {
                certified += 1;
                if cert.ord_det != Some(cert.orders.iter().map(|d| d - 1).sum()) {
                    ord_bad += 1;
                }
            }
            for _ in 0..7 {
                let v = random_field(s.n(), cap, 4, &mut rng);
                for i in 0..l {
                    nil_inputs += 1;
                    if !d_tilde(&dec, i, &d_tilde(&dec, i, &v)).is_zero() {
                        nil_bad += 1;
                    }
                }
            }
        }
    }
    Outcome {
        pass: cofactor_bad == 0 && nil_bad == 0 && ord_bad == 0 && nil_inputs >= 100 && certified > 0,
        detail: format!(
            "C·A=det·Id on {decs} decompositions ({cofactor_bad} bad entries), D̃∘D̃=0 on {nil_inputs} inputs \
             ({nil_bad} bad), ord det = Σ(d_i−1) on {certified} certified families ({ord_bad} bad)"
        ),
    }
}

// ---------------------------------------------------------------- 5

fn auto_normalization() -> Outcome {
    let cap = 12;
    let mut cases = 0;
    let mut bad = Vec::new();
    for (rows, orders) in [(ITO, &[1usize, 1][..]), (ITO, &[1, 3][..]), (TRIPLE, &[1, 1][..])] {
        let s = morphism(rows);
        let cfg = FamilyConfig {
            cap,
            orders: orders.to_vec(),
            jet_lo: 2,
            jet_hi: 4,
            jet_terms: 4,
        };
        let fam = conjugated_family(&s, &cfg, 31).unwrap();
        for k in [1usize, 2, 4, 8] {
            // normalize X alone to order k, then move Y by the same map
            let x = &fam.x[0];
            let pd = poincare_dulac_normalize(x, &x.jet(1), k.max(2), Gauge::ZeroOnKernel).unwrap();
            let map = JetDiffeo::from_components(pd.phi.components().iter().map(|c| c.with_cap(cap)).collect()).unwrap();
            let xk = map.pullback(x).unwrap();
            let yk = map.pullback(&fam.x[1]).unwrap();
            cases += 1;
            match check_auto_normalization(&xk, &yk, &xk.jet(1), k) {
                Ok(r) if r.holds => {}
                Ok(r) => bad.push(format!("{rows:?} k={k}: fails at order {}", r.claimed_order)),
                Err(e) => bad.push(format!("{rows:?} k={k}: {e}")),
            }
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!("{cases} pairs, k in 1,2,4,8, {}", failures("failures", &bad)),
    }
}

// ---------------------------------------------------------------- 6

/// `max_j |(Q, Λ_j) − Λ_{j,i}|` over all `2 ≤ |Q| ≤ 2^k`, by plain loops.
fn brute_omega(rows: &[&[i64]], k_max: usize) -> (Vec<f64>, Vec<(Vec<u32>, usize)>) {
    let n = rows[0].len();
    let mut omega = vec![1.0];
    let mut running = f64::INFINITY;
    let mut resonant = Vec::new();
    for k in 1..=k_max {
        let lo = if k == 1 { 2 } else { (1 << (k - 1)) + 1 };
        for d in lo..=(1usize << k) {
            let mut q = vec![0u32; n];
            // every composition of d into n parts
            fn rec(
                pos: usize,
                left: u32,
                q: &mut Vec<u32>,
                f: &mut dyn FnMut(&[u32]),
            ) {
                if pos + 1 == q.len() {
                    q[pos] = left;
                    f(q);
                    return;
                }
                for v in (0..=left).rev() {
                    q[pos] = v;
                    rec(pos + 1, left - v, q, f);
                }
            }
            rec(0, d as u32, &mut q, &mut |q: &[u32]| {
                for i in 0..n {
                    let w: Vec<i64> = rows
                        .iter()
                        .map(|r| r.iter().zip(q).map(|(a, b)| a * *b as i64).sum::<i64>() - r[i])
                        .collect();
                    if w.iter().all(|c| *c == 0) {
                        resonant.push((q.to_vec(), i));
                    } else {
                        running = running.min(w.iter().map(|c| c.abs() as f64).fold(0.0, f64::max));
                    }
                }
            });
        }
        omega.push(if running.is_finite() { running } else { 1.0 });
    }
    (omega, resonant)
}

/// `(q, i)` with `q·λ = λ_i`, `2 ≤ |q| ≤ top`, for positive integer `λ`.
fn integer_resonances(lambda: &[u32], top: u32) -> Vec<(Vec<u32>, usize)> {
    assert_eq!(lambda.len(), 2);
    let mut out = Vec::new();
    for (i, &target) in lambda.iter().enumerate() {
        for q1 in 0..=target / lambda[0] {
            let rest = target - q1 * lambda[0];
            if rest % lambda[1] == 0 {
                let q2 = rest / lambda[1];
                if (2..=top).contains(&(q1 + q2)) {
                    out.push((vec![q1, q2], i));
                }
            }
        }
    }
    out.sort();
    out
}

fn diophantine() -> Outcome {
    let s = morphism(ITO);
    let rep = s.omega_sequence(4, 10_000_000).unwrap();
    let (omega, mut resonant) = brute_omega(ITO, 4);
    let omega_ones = rep.omega[1..].iter().all(|w| *w == 1.0);
    let omega_match = rep.omega == omega;
    let bruno_zero = rep.bruno_partial == 0.0;
    let mut lib_res = rep.resonant_set.clone();
    lib_res.sort();
    resonant.sort();
    let res_match = lib_res == resonant;

    let single = morphism(&[&[1, 2]]);
    let rep2 = single.omega_sequence(3, 1_000_000).unwrap();
    let mut got = rep2.resonant_set.clone();
    got.sort();
    let want = integer_resonances(&[1, 2], 8);
    let single_match = got == want && !want.is_empty();
    Outcome {
        pass: omega_ones && omega_match && bruno_zero && res_match && single_match,
        detail: format!(
            "ω_1..4 = {:?} (brute force {:?}), Bruno partial {}, resonant sets match {res_match}; \
             λ=(1,2) resonances {:?} match {single_match}",
            &rep.omega[1..],
            &omega[1..],
            rep.bruno_partial,
            got
        ),
    }
}

// ---------------------------------------------------------------- 7

/// Normal family `S(g)` plus `ε`-small first-integral terms, hidden by an
/// `ε`-small jet.
fn small_family(s: &LieMorphism, cap: usize, seed: u64) -> Vec<VectorField> {
    let a = ex();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g0 = s.find_regular_element(cap, seed, 64).unwrap();
    let eps = a.ratio(1, 1000);
    let basis = s.basis_fields(cap);
    let nf: Vec<VectorField> = (0..s.l())
        .map(|i| {
            let mut x = VectorField::zero(s.n(), cap, a);
            for (j, sj) in basis.iter().enumerate() {
                let mut f = random_first_integral(s, cap - 1, 1, cap - 1, 2, &mut rng).scale(&eps);
                let c: Scalar = if i == 0 {
                    g0[j].clone()
                } else if i == j {
                    a.one()
                } else {
                    a.zero()
                };
                f.add_term(MultiIndex::zero(), c);
                x = &x + &sj.mul_function(&f.with_cap(cap));
            }
            x
        })
        .collect();
    let jet = random_jet(s.n(), cap, a, 2, 3, 3, &mut rng).unwrap();
    let jet = JetDiffeo::id_plus(&jet.nonlinear_part().scale(&eps)).unwrap();
    nf.iter().map(|f| jet.pullback(f).unwrap()).collect()
}

fn estimate_soundness() -> Outcome {
    let mut families = 0;
    let mut steps_checked = 0;
    let mut unmet = 0;
    let mut bounds = 0;
    let mut violated = Vec::new();
    for (rows, cap, seeds) in [(&[&[1i64, -1][..]][..], 16usize, 5u64), (&[&[1, 2, -3][..]][..], 8, 4), (ITO, 8, 4)] {
        let s = morphism(rows);
        for seed in 0..seeds {
            let x = small_family(&s, cap, seed);
            let mut opts = NormalizeOptions::new(cap, Mode::Newton);
            opts.seed = seed;
            let out = normalize_family(&x, &s, &opts).unwrap();
            let mut inside = true;
            for e in &out.report.estimates {
                if !e.hypotheses.theorem {
                    unmet += 1;
                    inside = false;
                    continue;
                }
                steps_checked += 1;
                for c in &e.checks {
                    bounds += 1;
                    if !(c.lhs <= c.rhs + 1e-9) {
                        violated.push(format!("{rows:?} seed {seed} m={}: {} > {}", e.constants.m, c.lhs, c.rhs));
                    }
                }
            }
            if inside && !out.report.estimates.is_empty() {
                families += 1;
            }
        }
    }
    Outcome {
        pass: families >= 10 && violated.is_empty(),
        detail: format!(
            "{families} families inside the region, {steps_checked} steps, {bounds} weight bounds, \
             {}, {unmet} steps with hypotheses unmet (reported, not asserted)",
            failures("violations", &violated)
        ),
    }
}

// ---------------------------------------------------------------- 8

fn ito_end_to_end() -> Outcome {
    let t = Instant::now();
    let a = ex();
    let hs = integrable_pair(&[a.one(), a.imag_unit()], 13, a, 5).unwrap();
    let out = run_ito(&hs, 20, &NormalizeOptions::new(12, Mode::Newton)).unwrap();
    let star = out.report.star.holds;
    let (checks, verified) = match &out.normalized {
        Some(n) => {
            let s = cartan_nf::hamiltonian::build_ito_morphism(2, a).unwrap();
            (n.report.checks.passed(), verify_action_normal_form(&n.nf, &s))
        }
        None => (false, false),
    };
    let el = t.elapsed();
    Outcome {
        pass: star && out.report.commute && checks && verified && within(el, 120.0),
        detail: format!(
            "(*) at bound 20 {star}, commute {}, normalized to 12 {checks}, action normal form {verified}, {:.1}s",
            out.report.commute,
            el.as_secs_f64()
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("two-variable example", two_variable),
        ("Newton doubling", newton_doubling),
        ("stepwise and Newton agree", oracle_equivalence),
        ("algebraic identities", algebraic_identities),
        ("auto-normalization of commuting fields", auto_normalization),
        ("small-divisor diagnostics", diophantine),
        ("estimate soundness", estimate_soundness),
        ("Hamiltonian end to end", ito_end_to_end),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("{} criterion {} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
