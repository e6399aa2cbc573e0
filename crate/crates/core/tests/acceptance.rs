//! Acceptance suite. Runs every criterion at its pinned tolerance on the
//! default grid, prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mellin_core::catalog::{Catalog, PairSpec};
use mellin_core::constructions::{
    build_w, fiber_vl, regularizer_symbol_f, regularizer_w, symbol_binomial_inverse_r,
    symbol_binomial_r, symbol_g_y, symbol_h, symbol_shift_r, BinomialData, ReciprocalOptions,
};
use mellin_core::fredholm::{
    disk_check_f, disk_check_g, ellipticity_check, homotopy_scan, ScanOptions, ScanReport,
    ELLIPTICITY_THRESHOLD,
};
use mellin_core::grid::{mellin_forward, mellin_inverse, Grid, GridFunction, GridSpec};
use mellin_core::operators::{
    band_projector, cauchy_sio_direct, combination, compactness_proxy, conv_operator, defect,
    difference, interior_probes, pdo_operator, product, Identity, OpRef, ProbeSet, ProxyConfig,
};
use mellin_core::shifts::{shift_operator, NeumannInverse, WeightedShift};
use mellin_core::symbols::{
    make_p_y, make_r_y, make_s_y, p_minus, p_plus, r_y, s_y, BivariateSymbol, Sign,
};
use mellin_core::{Error, Result, C64};

const SEED: u64 = 7;
const TOL: f64 = 1e-10;
const YS: [f64; 3] = [1.5, 2.0, 3.0];
const ONE: C64 = C64::new(1.0, 0.0);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }

    fn from_result(r: Result<Outcome>) -> Self {
        r.unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")))
    }
}

struct Ctx {
    grid: Arc<Grid>,
    catalog: Catalog,
    probes: ProbeSet,
}

impl Ctx {
    fn new(spec: GridSpec) -> Result<Self> {
        let grid = Grid::new(spec)?;
        let probes = interior_probes(&grid, SEED);
        Ok(Self {
            grid,
            catalog: Catalog::default(),
            probes,
        })
    }

    fn binomials(&self, pair: &PairSpec, y: f64, mu: f64) -> Result<(BinomialData, BinomialData)> {
        pair.binomials(y, mu, self.grid.p(), self.catalog.sampling)
    }
}

fn max_rel(a: &[C64], b: &[C64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

fn conv(ctx: &Ctx, m: Result<mellin_core::symbols::MultiplierSymbol>) -> Result<OpRef> {
    Ok(Arc::new(conv_operator(&m?, &ctx.grid)?))
}

fn pdo(ctx: &Ctx, a: &BivariateSymbol) -> Result<OpRef> {
    Ok(Arc::new(pdo_operator(a, &ctx.grid)?))
}

fn criterion_1(ctx: &Ctx) -> Result<Outcome> {
    let grid = &ctx.grid;
    let f = GridFunction::from_log_fn(Arc::clone(grid), |u| C64::new((-u * u).exp(), 0.0))?;
    let spectrum = mellin_forward(&f);
    let closed: Vec<C64> = grid
        .x()
        .iter()
        .map(|&x| C64::new(PI.sqrt() * (-x * x / 4.0).exp(), 0.0))
        .collect();
    let gaussian = max_rel(spectrum.values(), &closed);
    let g = GridFunction::from_log_fn(Arc::clone(grid), |u| {
        C64::from_polar((-(u - 1.5).powi(2) / 2.0).exp(), 0.75 * u) + C64::new(0.0, 0.4) * (-(u + 2.0).powi(2)).exp()
    })?;
    let round_trip = max_rel(mellin_inverse(&mellin_forward(&g)).samples(), g.samples());
    Ok(Outcome::new(
        gaussian <= 1e-6 && round_trip <= 1e-6,
        format!("gaussian {gaussian:.2e}, round trip {round_trip:.2e} (tol 1e-6)"),
    ))
}

fn criterion_2(ctx: &Ctx) -> Result<Outcome> {
    let direct = cauchy_sio_direct(&ctx.grid, 2.0)?;
    let band = conv_operator(&make_s_y(&ctx.grid, 2.0)?, &ctx.grid)?;
    let d = defect(&direct, &band, &ctx.probes);
    Ok(Outcome::new(d <= 1e-3, format!("PV quadrature vs multiplier {d:.2e} (tol 1e-3)")))
}

fn criterion_3(ctx: &Ctx) -> Result<Outcome> {
    let (mut pointwise, mut operator) = (0.0f64, 0.0f64);
    let quarter = C64::new(0.25, 0.0);
    for y in YS {
        for &x in ctx.grid.x() {
            let (s, r) = (s_y(x, y), r_y(x, y));
            pointwise = pointwise.max((s * s - r * r - 1.0).norm());
            pointwise = pointwise.max((p_plus(x, y) * p_minus(x, y) + r * r / 4.0).norm());
        }
        let pp = conv(ctx, make_p_y(&ctx.grid, y, Sign::Plus))?;
        let pm = conv(ctx, make_p_y(&ctx.grid, y, Sign::Minus))?;
        let r = conv(ctx, make_r_y(&ctx.grid, y))?;
        let r2 = product(vec![Arc::clone(&r), r])?;
        let cross = product(vec![Arc::clone(&pp), Arc::clone(&pm)])?;
        let expect = combination(vec![(-quarter, Arc::clone(&r2))])?;
        operator = operator.max(defect(cross.as_ref(), expect.as_ref(), &ctx.probes));
        for p in [pp, pm] {
            let square = product(vec![Arc::clone(&p), Arc::clone(&p)])?;
            let expect = combination(vec![(ONE, p), (quarter, Arc::clone(&r2))])?;
            operator = operator.max(defect(square.as_ref(), expect.as_ref(), &ctx.probes));
        }
    }
    Ok(Outcome::new(
        pointwise <= 1e-12 && operator <= 1e-8,
        format!("pointwise {pointwise:.2e} (tol 1e-12), operator {operator:.2e} (tol 1e-8)"),
    ))
}

fn criterion_4(ctx: &Ctx) -> Result<Outcome> {
    let (mut shift, mut binomial, mut inverse) = (0.0f64, 0.0f64, 0.0f64);
    let mut honest = true;
    let mut max_terms = 0;
    for pair in &ctx.catalog.pairs {
        let (dc, dd) = ctx.binomials(pair, 2.0, 1.0)?;
        for d in [dc, dd] {
            let r = conv(ctx, make_r_y(&ctx.grid, d.y))?;
            let u: OpRef = Arc::new(shift_operator(&d.gamma, &ctx.grid)?);
            let ur = product(vec![u, Arc::clone(&r)])?;
            let op_d = pdo(ctx, &symbol_shift_r(&d.gamma, d.y, &ctx.grid, d.sampling)?)?;
            shift = shift.max(defect(ur.as_ref(), op_d.as_ref(), &ctx.probes));

            let w: OpRef = Arc::new(WeightedShift::new(&d.coefficient(), &d.gamma, &ctx.grid)?);
            let ar = product(vec![combination(vec![(ONE, Identity::new(&ctx.grid)), (-ONE, w)])?, Arc::clone(&r)])?;
            let op_a = pdo(ctx, &symbol_binomial_r(&d, &ctx.grid)?)?;
            binomial = binomial.max(defect(ar.as_ref(), op_a.as_ref(), &ctx.probes));

            let neumann: OpRef = Arc::new(NeumannInverse::new(&d.coefficient(), &d.gamma, &ctx.grid, TOL)?);
            let nr = product(vec![neumann, r])?;
            let (c, report) = symbol_binomial_inverse_r(&d, &ctx.grid, TOL)?;
            inverse = inverse.max(defect(nr.as_ref(), pdo(ctx, &c)?.as_ref(), &ctx.probes));
            honest &= report.honest && report.fiber_sum_error <= report.fiber_sum_bound;
            max_terms = max_terms.max(report.terms_max);
        }
    }
    Ok(Outcome::new(
        shift <= 1e-6 && binomial <= 1e-6 && inverse <= 1e-6 && honest,
        format!(
            "U R vs Op(d) {shift:.2e}, (I-vU)R vs Op(a) {binomial:.2e}, Neumann vs series {inverse:.2e} (tol 1e-6), tail bounds honest {honest}, terms <= {max_terms}"
        ),
    ))
}

fn criterion_5(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut margin = f64::INFINITY;
    let mut pass = true;
    for pair in &ctx.catalog.pairs {
        let (dc, dd) = ctx.binomials(pair, 2.0, 1.0)?;
        for d in [dc, dd] {
            let (_, report) = symbol_binomial_inverse_r(&d, &ctx.grid, TOL)?;
            let tested = report.root_test.len() >= 10;
            pass &= tested && report.root_limit < 0.95 && report.root_margin > 0.0;
            worst = worst.max(report.root_limit);
            margin = margin.min(report.root_margin);
        }
    }
    Ok(Outcome::new(
        pass,
        format!("max_n>=10 |a_n|^(1/n) = {worst:.3} (limit 0.95), declared margin {margin:.3}"),
    ))
}

fn criterion_6(_: &Ctx) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let x: Vec<f64> = (0..8001).map(|k| -40.0 + 0.01 * k as f64).collect();
    let (mut excess_f, mut excess_g, mut min_g) = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    for _ in 0..100 {
        let mut coefficient = || C64::from_polar(rng.random_range(0.0..0.99), rng.random_range(-PI..PI));
        let (v, w) = (coefficient(), coefficient());
        let (psi, zeta) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let f = disk_check_f(v, w, psi, zeta, &x);
        excess_f = excess_f.max(f.max_distance - f.radius);
        let g = disk_check_g(v, w, psi, zeta, &x)?;
        excess_g = excess_g.max(g.max_distance - g.radius);
        min_g = min_g.min(g.min_abs);
    }
    Ok(Outcome::new(
        excess_f <= 1e-12 && excess_g <= 1e-12 && min_g > 0.0,
        format!("max excess over radius f {excess_f:.2e}, g {excess_g:.2e} (tol 1e-12), min |g| {min_g:.3}"),
    ))
}

fn criterion_7(ctx: &Ctx) -> Result<Outcome> {
    let mut fiber = 0.0f64;
    let mut boundary_exact = true;
    for pair in &ctx.catalog.pairs {
        for mu in [0.5, 1.0] {
            let (dc, dd) = ctx.binomials(pair, 2.0, mu)?;
            let h = symbol_h(&dc, &dd, &ctx.grid, TOL)?.symbol;
            boundary_exact &= h.boundary_minus().iter().chain(h.boundary_plus()).all(|&z| z == ONE);
            for row in h.fibers() {
                let (v, l) = fiber_vl(&dc, &dd, &row.point, ctx.grid.x())?;
                for k in 0..v.len() {
                    fiber = fiber.max((row.values[k] - v[k] * l[k]).norm());
                }
            }
        }
    }
    Ok(Outcome::new(
        fiber <= 1e-10 && boundary_exact,
        format!("fiber |h - v l| {fiber:.2e} (tol 1e-10), boundary rows exactly 1: {boundary_exact}"),
    ))
}

fn scans(ctx: &Ctx, compactness: bool) -> Result<Vec<(String, ScanReport)>> {
    let options = ScanOptions {
        seed: SEED,
        tol: TOL,
        compactness: compactness.then(|| ProxyConfig {
            seed: SEED,
            ..ProxyConfig::default()
        }),
        ..ScanOptions::default()
    };
    ctx.catalog
        .pairs
        .iter()
        .map(|pair| {
            let (dc, dd) = ctx.binomials(pair, 2.0, 1.0)?;
            Ok((pair.name.clone(), homotopy_scan(&dc, &dd, &ctx.grid, &options)?))
        })
        .collect()
}

fn criterion_8(scans: &[(String, ScanReport)]) -> Outcome {
    let (mut pass, mut sigma, mut edge) = (true, 0.0f64, 0.0f64);
    for (_, report) in scans {
        for row in &report.rows {
            for c in [&row.vl_minus_h, &row.lv_minus_h] {
                match c {
                    Some(c) => {
                        pass &= c.is_compact_like();
                        sigma = sigma.max(c.sigma_at_eighth().upper);
                        edge = edge.max(c.max_edge_response);
                    }
                    None => pass = false,
                }
            }
        }
    }
    Outcome::new(
        pass,
        format!("VL-H, LV-H over all scanned mu: sigma_n/8 ratio <= {sigma:.2e} (tol 1e-3), edge <= {edge:.2e} (tol 1e-2)"),
    )
}

fn criterion_9(scans: &Result<Vec<(String, ScanReport)>>) -> Outcome {
    let scans = match scans {
        Ok(s) => s,
        Err(e) => return Outcome::new(false, format!("error: {e}")),
    };
    let (mut pass, mut residual, mut v0, mut lipschitz) = (true, 0.0f64, 0.0f64, true);
    let mut steps = 0;
    for (_, report) in scans {
        pass &= report.index_zero && report.rows.len() == 11;
        v0 = v0.max(report.rows[0].identity_defect);
        for row in &report.rows {
            pass &= row.ellipticity.pass;
            residual = residual.max(row.residual);
            lipschitz &= row.lipschitz_ok;
            steps += 1;
        }
    }
    pass &= v0 <= 1e-8 && residual <= 1e-2;
    Outcome::new(
        pass,
        format!(
            "{steps} steps elliptic, winding 0 throughout; V_0 - I {v0:.2e} (tol 1e-8), residual {residual:.2e} (tol 1e-2); norm Lipschitz {lipschitz}"
        ),
    )
}

fn criterion_10(ctx: &Ctx) -> Result<Outcome> {
    let config = ProxyConfig {
        seed: SEED,
        ..ProxyConfig::default()
    };
    let options = ReciprocalOptions::default();
    let (mut pass, mut sigma, mut edge) = (true, 0.0f64, 0.0f64);
    let mut record = |c: &mellin_core::operators::CompactnessReport| {
        pass &= c.is_compact_like();
        sigma = sigma.max(c.sigma_at_eighth().upper);
        edge = edge.max(c.max_edge_response);
    };
    let base = ctx.catalog.primary();
    for (e1, e2) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
        let pair = base.with_directions(e1, e2);
        let (dc, dd) = ctx.binomials(&pair, 2.0, 1.0)?;
        let w = build_w(&dc, &dd, &ctx.grid)?;
        let (w_inv, _) = regularizer_w(&dc, &dd, &ctx.grid, TOL, &options)?;
        let ww = product(vec![w_inv, Arc::clone(&w)])?;
        record(&compactness_proxy(difference(&ww, &band_projector(&ctx.grid))?.as_ref(), &config)?);
        let (f, _) = regularizer_symbol_f(&dc, &dd, &ctx.grid, TOL, &options)?;
        for y in YS {
            let (g, _) = symbol_g_y(&dc, &dd, y, &f.symbol, &ctx.grid, TOL)?;
            let gw = product(vec![pdo(ctx, &g)?, Arc::clone(&w)])?;
            let r = conv(ctx, make_r_y(&ctx.grid, y))?;
            record(&compactness_proxy(difference(&gw, &r)?.as_ref(), &config)?);
        }
    }
    Ok(Outcome::new(
        pass,
        format!("4 direction pairs x (W'W - I, Op(g_y)W - R_y for 3 y): sigma_n/8 ratio <= {sigma:.2e}, edge <= {edge:.2e}"),
    ))
}

fn criterion_12(ctx: &Ctx) -> Result<Outcome> {
    let violating = &ctx.catalog.violating;
    let (dc, dd) = ctx.binomials(violating, 2.0, 1.0)?;
    let scan = homotopy_scan(&dc, &dd, &ctx.grid, &ScanOptions::default());
    let fixture_fails = matches!(scan, Err(Error::Ellipticity(_)));
    let r = BivariateSymbol::x_only(&make_r_y(&ctx.grid, 2.0)?, ctx.catalog.sampling)?;
    let r_report = ellipticity_check(&r, ELLIPTICITY_THRESHOLD);
    let r_fails = !r_report.pass && r_report.min_boundary < ELLIPTICITY_THRESHOLD;
    let identity = compactness_proxy(Identity::new(&ctx.grid).as_ref(), &ProxyConfig::default())?;
    let identity_fails = !identity.is_compact_like();
    let why = match &scan {
        Err(e) => e.to_string(),
        Ok(_) => "scan completed".into(),
    };
    Ok(Outcome::new(
        fixture_fails && r_fails && identity_fails,
        format!(
            "violating fixture rejected: {fixture_fails} ({why}); r_y boundary min {:.1e}; identity compact-like: {}",
            r_report.min_boundary, !identity_fails
        ),
    ))
}

struct Stable {
    c3: Outcome,
    c4: Outcome,
    c7: Outcome,
    c9: Outcome,
}

fn stable_set(ctx: &Ctx, scans: &Result<Vec<(String, ScanReport)>>) -> Stable {
    Stable {
        c3: Outcome::from_result(criterion_3(ctx)),
        c4: Outcome::from_result(criterion_4(ctx)),
        c7: Outcome::from_result(criterion_7(ctx)),
        c9: criterion_9(scans),
    }
}

fn line(n: u32, name: &str, outcome: &Outcome, started: Instant) -> bool {
    let verdict = if outcome.pass { "PASS" } else { "FAIL" };
    println!(
        "criterion {n:>2} {verdict} {name}: {} [{:.1}s]",
        outcome.detail,
        started.elapsed().as_secs_f64()
    );
    outcome.pass
}

fn main() -> ExitCode {
    let ctx = match Ctx::new(GridSpec::default()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("cannot build default grid: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!("acceptance suite on grid {} (seed {SEED})", ctx.grid.spec().hash());
    let mut all = true;
    let t = Instant::now();
    all &= line(1, "transform fidelity", &Outcome::from_result(criterion_1(&ctx)), t);
    let t = Instant::now();
    all &= line(2, "multiplier realization", &Outcome::from_result(criterion_2(&ctx)), t);

    let t = Instant::now();
    let full_scans = scans(&ctx, true);
    let base = stable_set(&ctx, &full_scans);
    all &= line(3, "exact algebra", &base.c3, t);
    all &= line(4, "PDO realization", &base.c4, t);
    let t = Instant::now();
    all &= line(5, "root test", &Outcome::from_result(criterion_5(&ctx)), t);
    let t = Instant::now();
    all &= line(6, "disk lemmas", &Outcome::from_result(criterion_6(&ctx)), t);
    all &= line(7, "fiber factorization", &base.c7, t);
    let c8 = match &full_scans {
        Ok(s) => criterion_8(s),
        Err(e) => Outcome::new(false, format!("error: {e}")),
    };
    all &= line(8, "regularization chain", &c8, t);
    all &= line(9, "index zero", &base.c9, t);
    let t = Instant::now();
    all &= line(10, "W relations", &Outcome::from_result(criterion_10(&ctx)), t);

    let t = Instant::now();
    let c11 = match Ctx::new(ctx.grid.spec().refined()) {
        Ok(fine) => {
            let fine_scans = scans(&fine, false);
            let refined = stable_set(&fine, &fine_scans);
            let pairs = [
                (3, &base.c3, &refined.c3),
                (4, &base.c4, &refined.c4),
                (7, &base.c7, &refined.c7),
                (9, &base.c9, &refined.c9),
            ];
            let same = pairs.iter().all(|(_, a, b)| a.pass == b.pass);
            let detail = pairs
                .iter()
                .map(|(n, a, b)| format!("c{n} {}->{} ({})", verdict(a), verdict(b), b.detail))
                .collect::<Vec<_>>()
                .join("; ");
            Outcome::new(same, format!("n_t {}, n_x {}: {detail}", fine.grid.n_t(), fine.grid.n_x()))
        }
        Err(e) => Outcome::new(false, format!("error: {e}")),
    };
    all &= line(11, "grid stability", &c11, t);
    let t = Instant::now();
    all &= line(12, "negative controls", &Outcome::from_result(criterion_12(&ctx)), t);

    if all {
        println!("acceptance: all criteria PASS");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAIL");
        ExitCode::FAILURE
    }
}

fn verdict(o: &Outcome) -> &'static str {
    if o.pass {
        "PASS"
    } else {
        "FAIL"
    }
}
