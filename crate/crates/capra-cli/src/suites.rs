//! Verification suites behind `capra verify`: per-module invariant checks
//! at a scale that runs in seconds, with max observed deviations reported.

use capra_core::conjugacy::{
    biconjugate, conjugate, infimal_postcomposition, minus_conjugate, normalize,
    reverse_conjugate, Coupling, GridFunction, Mapping,
};
use capra_core::hidden_convexity::{
    calL0_2d, calL0_general, decompose_2d, epigraph_grid_check, lbar0, verify_kkt_2d,
};
use capra_core::l0::{capra_biconj_l0, capra_conj_l0, capra_l0_primal_grid, l0, phi_ray};
use capra_core::norms::{gauge_norm, support_function_sampled, support_norm, Vector};
use capra_core::xreal::ExtReal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct SuiteResult {
    pub name: &'static str,
    pub pass: bool,
    pub max_dev: f64,
    pub detail: String,
}

struct Ctx {
    seed: u64,
    grid_tol: f64,
    eq_tol: f64,
    coupling: Coupling,
}

pub fn run(
    suite: Option<&str>,
    seed: u64,
    grid_tol: f64,
    eq_tol: f64,
    inject: bool,
) -> Result<bool, String> {
    let coupling = if inject {
        // Test hook: one-sided linear coupling whose mapping sends 0 to e_1
        // instead of 0, breaking the Capra convention c(0, .) = 0.
        Coupling::OneSidedLinear(Mapping::new(|x: &Vector| {
            if x.norm() == 0.0 {
                let mut e = vec![0.0; x.dim()];
                e[0] = 1.0;
                Vector::new(e).expect("finite")
            } else {
                normalize(x)
            }
        }))
    } else {
        Coupling::Capra
    };
    let ctx = Ctx {
        seed,
        grid_tol,
        eq_tol,
        coupling,
    };
    let all: [(&str, fn(&Ctx) -> SuiteResult); 5] = [
        ("xreal", suite_xreal),
        ("norms", suite_norms),
        ("conjugacy", suite_conjugacy),
        ("l0", suite_l0),
        ("hidden", suite_hidden),
    ];
    let selected: Vec<_> = match suite {
        None => all.to_vec(),
        Some(name) => {
            let hit: Vec<_> = all.iter().copied().filter(|(n, _)| *n == name).collect();
            if hit.is_empty() {
                return Err(format!(
                    "unknown suite {name:?}; available: xreal, norms, conjugacy, l0, hidden"
                ));
            }
            hit
        }
    };
    println!("# capra verify");
    println!("# seed {seed}");
    println!("# grid_tol {grid_tol}");
    println!("# eq_tol {eq_tol}");
    println!("# inject {inject}");
    let mut ok = true;
    for (_, f) in selected {
        let r = f(&ctx);
        ok &= r.pass;
        println!(
            "suite {:<10} {} (max deviation {:e}; {})",
            r.name,
            if r.pass { "pass" } else { "FAIL" },
            r.max_dev,
            r.detail
        );
    }
    Ok(ok)
}

const ALPHABET: [ExtReal; 5] = [
    ExtReal::NegInf,
    ExtReal::Finite(-1.0),
    ExtReal::Finite(0.0),
    ExtReal::Finite(1.0),
    ExtReal::PosInf,
];

fn suite_xreal(_ctx: &Ctx) -> SuiteResult {
    let mut failures = 0usize;
    let mut checks = 0usize;
    let mut check = |c: bool| {
        checks += 1;
        if !c {
            failures += 1;
        }
    };
    for &u in &ALPHABET {
        for &v in &ALPHABET {
            check(u.lower_add(v) == v.lower_add(u));
            check(u.upper_add(v) == v.upper_add(u));
            check(u.lower_add(v) <= u.upper_add(v));
            check(u.upper_add(v).neg() == u.neg().lower_add(v.neg()));
            for &w in &ALPHABET {
                check(u.lower_add(v).lower_add(w) == u.lower_add(v.lower_add(w)));
                check(u.upper_add(v).upper_add(w) == u.upper_add(v.upper_add(w)));
                check(u.upper_add(v).lower_add(w) <= u.upper_add(v.lower_add(w)));
                if u <= v {
                    check(u.lower_add(w) <= v.lower_add(w));
                    check(u.upper_add(w) <= v.upper_add(w));
                }
            }
        }
    }
    SuiteResult {
        name: "xreal",
        pass: failures == 0,
        max_dev: failures as f64,
        detail: format!("{checks} exhaustive law instances"),
    }
}

fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> Vector {
    Vector::new((0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).expect("finite")
}

fn gauge_brute(x: &Vector, k: usize) -> f64 {
    let d = x.dim();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << d) {
        if (mask.count_ones() as usize) != k {
            continue;
        }
        let mut sum = 0.0;
        for i in 0..d {
            if mask & (1 << i) != 0 {
                sum += x[i] * x[i];
            }
        }
        let nrm = sum.sqrt();
        if nrm > best {
            best = nrm;
        }
    }
    best
}

fn suite_norms(ctx: &Ctx) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut max_dev = 0.0f64;
    let mut pass = true;
    for _ in 0..200 {
        let d = rng.gen_range(2..=8);
        let x = random_vector(&mut rng, d);
        for k in 1..=d {
            let g = gauge_norm(&x, k).expect("k in range");
            if g != gauge_brute(&x, k) {
                pass = false;
            }
            let s = support_norm(&x, k).expect("k in range");
            // Duality bound on sampled ratios.
            for _ in 0..5 {
                let y = random_vector(&mut rng, d);
                let gy = gauge_norm(&y, k).expect("k in range");
                if gy > 1e-12 {
                    let dev = x.dot(&y) / gy - s;
                    max_dev = max_dev.max(dev);
                    if dev > ctx.eq_tol {
                        pass = false;
                    }
                }
            }
        }
    }
    SuiteResult {
        name: "norms",
        pass,
        max_dev,
        detail: "brute-force gauge equality and duality ratio bound".to_string(),
    }
}

fn suite_conjugacy(ctx: &Ctx) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0x5eed);
    let mut pass = true;
    let mut instances = 0usize;
    for _ in 0..50 {
        let d = rng.gen_range(1..=3);
        let nw = rng.gen_range(1..=40);
        let ny = rng.gen_range(1..=40);
        let matrix: Vec<f64> = (0..d * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let md = d;
        let theta = Mapping::new(move |w: &Vector| {
            let mut out = vec![0.0; md];
            for i in 0..md {
                for j in 0..md {
                    out[i] += matrix[i * md + j] * w[j];
                }
            }
            Vector::new(out).expect("finite")
        });
        let mut ws = Vec::new();
        while ws.len() < nw {
            let w = random_vector(&mut rng, d);
            if !ws.contains(&w) {
                ws.push(w);
            }
        }
        let mut ys = Vec::new();
        while ys.len() < ny {
            let y = random_vector(&mut rng, d);
            if !ys.contains(&y) {
                ys.push(y);
            }
        }
        let f = GridFunction::tabulate(ws.clone(), |_| {
            ExtReal::finite(rng.gen_range(-3.0..3.0))
        })
        .expect("distinct points");
        let c = Coupling::OneSidedLinear(theta.clone());
        let mut images: Vec<Vector> = ws.iter().map(|w| theta.apply(w)).collect();
        images.sort_by(|a, b| a.as_slice().partial_cmp(b.as_slice()).unwrap());
        images.dedup();
        let pushed = infimal_postcomposition(&theta, &f, &images).expect("distinct");

        // (i) conjugate under the one-sided coupling equals the Fenchel
        // conjugate of the infimal postcomposition.
        let lhs = conjugate(&f, &c, &ys).expect("grids");
        let rhs = conjugate(&pushed, &Coupling::Bilinear, &ys).expect("grids");
        if lhs.values() != rhs.values() {
            pass = false;
        }

        // (ii) reverse conjugate factors through theta.
        let g = GridFunction::tabulate(ys.clone(), |_| {
            ExtReal::finite(rng.gen_range(-3.0..3.0))
        })
        .expect("distinct points");
        let lhs2 = reverse_conjugate(&g, &c, &ws).expect("grids");
        for (w, v) in ws.iter().zip(lhs2.values()) {
            let rhs2 = reverse_conjugate(&g, &Coupling::Bilinear, &[theta.apply(w)])
                .expect("grids");
            if *v != rhs2.values()[0] {
                pass = false;
            }
        }

        // (iii) biconjugate factorization.
        let bi = biconjugate(&f, &c, &ys).expect("grids");
        let conj_pushed = conjugate(&pushed, &Coupling::Bilinear, &ys).expect("grids");
        for (w, v) in ws.iter().zip(bi.values()) {
            let at = reverse_conjugate(&conj_pushed, &Coupling::Bilinear, &[theta.apply(w)])
                .expect("grids");
            if *v != at.values()[0] {
                pass = false;
            }
        }

        // (iv) minus-conjugate of an indicator equals the sampled support
        // function of the negated image set.
        let subset: Vec<bool> = ws.iter().map(|_| rng.gen_bool(0.5)).collect();
        let delta = GridFunction::new(
            ws.clone(),
            subset
                .iter()
                .map(|&inside| {
                    if inside {
                        ExtReal::finite(0.0)
                    } else {
                        ExtReal::PosInf
                    }
                })
                .collect(),
        )
        .expect("distinct points");
        let mc = minus_conjugate(&delta, &c, &ys).expect("grids");
        let negated: Vec<Vector> = ws
            .iter()
            .zip(&subset)
            .filter(|(_, &inside)| inside)
            .map(|(w, _)| theta.apply(w).scale(-1.0))
            .collect();
        for (y, v) in ys.iter().zip(mc.values()) {
            if *v != support_function_sampled(&negated, y) {
                pass = false;
            }
        }
        instances += 1;
    }
    SuiteResult {
        name: "conjugacy",
        pass,
        max_dev: 0.0,
        detail: format!("{instances} one-sided-linear instances, all four identities exact"),
    }
}

fn random_sparse(rng: &mut ChaCha8Rng, d: usize) -> Vector {
    let k = rng.gen_range(0..=d);
    let mut v = vec![0.0; d];
    let mut idx: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        idx.swap(i, rng.gen_range(0..=i));
    }
    for &i in idx.iter().take(k) {
        let mut c = 0.0f64;
        while c.abs() < 0.2 {
            c = rng.gen_range(-3.0..3.0);
        }
        v[i] = c;
    }
    Vector::new(v).expect("finite")
}

fn suite_l0(ctx: &Ctx) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0xf00d);
    let mut max_dev = 0.0f64;
    let mut pass = true;

    // Grid-engine conjugate against the closed form on a d = 2 dual grid.
    let xs = capra_l0_primal_grid(2, 720, &[1.0]).expect("grid");
    let f = GridFunction::tabulate(xs, |x| ExtReal::finite(l0(x) as f64)).expect("distinct");
    let dirs =
        capra_core::conjugacy::sphere_grid(2, 360, capra_core::conjugacy::SphereScheme::Uniform)
            .expect("grid");
    let mut ys = vec![Vector::zeros(2)];
    for i in 1..=20 {
        let r = 5.0 * i as f64 / 20.0;
        for u in &dirs {
            ys.push(u.scale(r));
        }
    }
    let conj = conjugate(&f, &ctx.coupling, &ys).expect("grids");
    for (y, v) in conj.domain().iter().zip(conj.values()) {
        let dev = (v.to_f64() - capra_conj_l0(y)).abs();
        max_dev = max_dev.max(dev);
        if dev > ctx.grid_tol {
            pass = false;
        }
    }

    // Biconjugate recovery through the ray certificate, exactly.
    for _ in 0..100 {
        let d = rng.gen_range(1..=6);
        let x = random_sparse(&mut rng, d);
        let (val, cert) = capra_biconj_l0(&x);
        if val != l0(&x) {
            pass = false;
        }
        if x.norm() > 0.0 && phi_ray(&x, 2.0 * cert.lambda_threshold.max(0.5)) != l0(&x) as f64 {
            pass = false;
        }
    }
    SuiteResult {
        name: "l0",
        pass,
        max_dev,
        detail: "grid vs closed-form conjugate and exact biconjugate recovery".to_string(),
    }
}

fn suite_hidden(ctx: &Ctx) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0xbeef);
    let mut max_dev = 0.0f64;
    let mut pass = true;
    for _ in 0..100 {
        let x = Vector::new(vec![rng.gen_range(-0.999..0.999), rng.gen_range(-0.999..0.999)])
            .expect("finite");
        if x.norm() >= 1.0 {
            continue;
        }
        let closed = calL0_2d(&x).expect("dim 2").to_f64();
        let dec = decompose_2d(&x).expect("inside the ball");
        if !verify_kkt_2d(&x, &dec).ok {
            pass = false;
        }
        let dev = (dec.objective - closed).abs();
        max_dev = max_dev.max(dev);
        if dev > ctx.eq_tol {
            pass = false;
        }
        // Staircase majorization.
        if lbar0(&x).to_ext_real().to_f64() < closed - 1e-12 {
            pass = false;
        }
    }
    // Ascent agreement on a few interior points.
    for _ in 0..10 {
        let x = Vector::new(vec![rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7)])
            .expect("finite");
        let closed = calL0_2d(&x).expect("dim 2").to_f64();
        let got = calL0_general(&x, 1e-4, 100_000).value.to_f64();
        if (closed - got).abs() > 1e-3 {
            pass = false;
        }
    }
    // Epigraph identity on a coarse grid.
    let err = epigraph_grid_check(101);
    if err > 0.12 {
        pass = false;
    }
    SuiteResult {
        name: "hidden",
        pass,
        max_dev,
        detail: format!("KKT + closed form + ascent; epigraph(101) err {err:.4}"),
    }
}
