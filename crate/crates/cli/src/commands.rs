use std::sync::Arc;

use anyhow::{anyhow, bail, Result};
use slowgrowth::approximation::{build_fk, build_ftilde_k, energy_convergence_check, k_sweep, perturbation_h_derivs, perturbed_bound_check, sample_points};
use slowgrowth::apriori::{
    g1g2_integral_check, interpolation_lemma_check, iteration_schedule, lambda_sweep, lemmapaolo_check, lemmapaolo_integral, scaling_study, spike, step1_inequality_probe, Admissibility,
    BaseData, Field, ScalingConfig, DEFAULT_RADIUS_PAIRS, LEMMA_RTOL,
};
use slowgrowth::ellipticity::{self, AnalysisConfig, AnalysisReport};
use slowgrowth::grid::GridFunction;
use slowgrowth::integrand::{from_spec, Density, EnergyDensity, CATALOG};
use slowgrowth::quadrature::integrate_adaptive;
use slowgrowth::solver::{minimize, SolverOptions};
use slowgrowth::sphere::log_grid;

use crate::config::RunConfig;
use crate::report::{Check, Report};

fn density(cfg: &RunConfig) -> Result<Density> {
    Ok(from_spec(&cfg.general.integrand)?)
}

fn run_analysis(cfg: &RunConfig, f: &dyn EnergyDensity) -> Result<AnalysisReport> {
    let a = &cfg.analyze;
    let acfg = AnalysisConfig {
        t_min: a.t_min,
        t_max: a.t_max,
        points: a.points,
        n_dirs: a.n_dirs,
        seed: cfg.general.seed,
        mu: a.mu,
        beta: a.beta,
        alpha: a.alpha,
        c1: a.c1,
        c2: a.c2,
        two_star: a.two_star,
    };
    Ok(ellipticity::analyze(f, &acfg)?)
}

fn g2_sampler(f: &Density) -> Result<impl Fn(f64) -> f64 + Sync + '_> {
    f.g2_closed(2.0).ok_or_else(|| anyhow!("{} has no closed-form upper bound g2", f.spec_string()))?;
    Ok(move |t: f64| f.g2_closed(t).unwrap_or(f64::NAN))
}

pub fn catalog(cfg: &RunConfig) -> Result<Report> {
    let mut r = Report::new("catalog", cfg);
    let mut csv = String::from("name,formula,params\n");
    for e in CATALOG {
        println!("{:<24} {:<52} {}", e.name, e.formula, e.params);
        csv.push_str(&format!("{},\"{}\",\"{}\"\n", e.name, e.formula, e.params));
    }
    let names: Vec<&str> = CATALOG.iter().map(|e| e.name).collect();
    r.data("entries", &names)?;
    r.csv("catalog.csv", csv);
    Ok(r)
}

pub fn analyze(cfg: &RunConfig) -> Result<Report> {
    let f = density(cfg)?;
    let rep = run_analysis(cfg, f.as_ref())?;
    let mut r = Report::new("analyze", cfg);
    let statements = [
        ("H1", "0 < g1 <= g2 bound the Hessian quadratic form"),
        ("H2", "t^mu g2(t) is non-increasing"),
        ("H3", "g2^(2/2*) <= C1 t^(2 beta) g1"),
        ("H4", "t^2 g2(t) <= C2 (1 + f)^alpha"),
        ("H5", "superlinear growth of f"),
    ];
    for (v, (_, s)) in rep.verdicts().iter().zip(statements) {
        r.check(Check::new(v.id, s, v.pass, format!("{}; margin {:e}", v.note, v.margin)).witness(v.witness));
    }
    r.check(Check::new(
        "ab",
        "2 - mu - alpha (n beta - mu) > 0",
        rep.ab.pass,
        format!("denominator {:e}; theta {:?}; interpolation form {}", rep.ab.denominator, rep.ab.theta, rep.ab.interpolation_form),
    ));
    let name = f.name().to_string();
    if let Some(x) = &rep.exponents {
        let pq_family = matches!(name.as_str(), "power_regularized" | "radial_power" | "aniso_power_sum");
        let c = Check::new("pq_ratio", "q/p < 1 + 2/n", x.pq_ok, format!("p = {}, q = {}, exponent {:?}", x.p, x.q, x.theta_pq));
        r.check(if pq_family { c } else { c.info() });
        let c = Check::new("aniso", "p > 2n/(n+2)", x.aniso_ok, format!("p = {}, 2n/(n+2) = {}", x.p, 2.0 * x.n as f64 / (x.n as f64 + 2.0)));
        r.check(if name == "aniso_power_sum" { c } else { c.info() });
        let c = Check::new("ex1", "s < (2/n) p + r", x.ex1_ok, format!("r = {}, s = {}; equivalent form {}", x.r, x.s, x.ex1_equiv_ok));
        r.check(if name == "sqrt_power_sum" { c } else { c.info() });
        let c = Check::new("ex2", "q < n p / (n - p)", x.ex2_ok, format!("trivial (p >= n): {}", x.ex2_trivial));
        r.check(if name == "p_plus_h" { c } else { c.info() });
        r.check(Check::new("ordering", "r <= p <= q <= s <= 2", x.ordering_ok, format!("r = {}, s = {}", x.r, x.s)).info());
    }
    if let Some((lo, hi)) = rep.remark {
        r.check(Check::new("remark", "(1 + 2/n) r < (2/n) p + r", lo < hi, format!("{lo} < {hi}")).info());
    }
    let mut csv = String::from("t,g1,g2\n");
    for i in 0..rep.samples.t_grid.len() {
        csv.push_str(&format!("{:e},{:e},{:e}\n", rep.samples.t_grid[i], rep.samples.g1()[i], rep.samples.g2()[i]));
    }
    r.data("integrand", &rep.integrand)?;
    r.data("window", &(rep.t_min, rep.t_max, rep.points))?;
    r.data("params", &rep.params)?;
    if let Some(t) = rep.ab.theta {
        r.data("theta", &t)?;
    }
    if let Some(g) = rep.gradient_exponent {
        r.data("gradient_exponent", &g)?;
    }
    if let Some(x) = &rep.exponents {
        r.data("exponents", x)?;
    }
    r.csv("analyze_bounds.csv", csv);
    Ok(r)
}

pub fn approx(cfg: &RunConfig) -> Result<Report> {
    let a = &cfg.approx;
    let seed = cfg.general.seed;
    let f = density(cfg)?;
    let t0 = a.t0.unwrap_or(f.t0());
    if a.ks.is_empty() {
        bail!("approx needs at least one k");
    }
    let mut r = Report::new("approx", cfg);

    let sweep = k_sweep(&f, t0, &a.ks, a.n_points, seed)?;
    let tail_ok = sweep.k_star.is_some();
    r.check(Check::new("k_star", "f_k convex with sup |f - f_k| <= 1 for large k", tail_ok, format!("k* = {:?}", sweep.k_star)));
    let mut csv = String::from("k,sup_gap,min_quadform,convex,gap_ok\n");
    for row in &sweep.rows {
        csv.push_str(&format!("{},{:e},{:e},{},{}\n", row.k, row.sup_gap, row.min_quadform, row.convex, row.gap_ok));
    }
    r.csv("approx_k.csv", csv);

    let far: Vec<Vec<f64>> = sample_points(f.dim(), 3.0 * (t0 + 2.0), 4 * a.n_points, seed ^ 0x5eed)
        .into_iter()
        .map(|(xi, _)| xi)
        .filter(|xi| xi.iter().map(|x| x * x).sum::<f64>().sqrt() >= t0 + 2.0)
        .collect();
    let mut exact = true;
    let mut exact_witness = None;
    for &k in a.ks.iter().filter(|&&k| k >= 4) {
        let fk = build_fk(f.clone(), k, t0)?;
        for xi in &far {
            if fk.eval(xi).to_bits() != f.eval(xi).to_bits() || fk.grad(xi) != f.grad(xi) {
                exact = false;
                exact_witness = Some(xi.iter().map(|x| x * x).sum::<f64>().sqrt());
            }
        }
    }
    r.check(Check::new("fk_exact", "f_k = f for |xi| >= t0 + 2 and k >= 4", exact, format!("{} sample points", far.len())).witness(exact_witness));

    let mut junction: f64 = 0.0;
    for t in [1.0, 1.0 - 1e-15, 1.0 + 1e-15] {
        let (h, h1, h2) = perturbation_h_derivs(t)?;
        junction = junction.max((h - 1.0).abs()).max((h1 - 1.0).abs()).max(h2.abs());
    }
    r.check(Check::new("h_junction", "(h, h', h'') = (1, 1, 0) at t = 1", junction <= 1e-12, format!("max deviation {junction:e}")));

    let k = *a.ks.iter().max().unwrap();
    let ft = build_ftilde_k(Arc::new(build_fk(f.clone(), k, t0)?), k, t0)?;
    let t_grid = log_grid(t0 + 2.0, 100.0 * (t0 + 2.0), 40);
    let g2 = ellipticity::sample_growth_bounds(f.as_ref(), &t_grid, a.n_dirs, seed)?;
    let pb = perturbed_bound_check(&ft, &t_grid, g2.g2(), a.n_dirs, seed)?;
    let c = Check::new(
        "perturbed_bound",
        "Hessian of the perturbed f_k <= 2 g2 beyond t0 + 2",
        pb.pass,
        format!("k = {}, threshold {:e}, worst ratio {:e}", pb.k, pb.k_threshold, pb.worst_ratio),
    )
    .witness(pb.witness);
    r.check(if (k as f64) >= pb.k_threshold { c } else { c.info() });
    r.data("k_sweep", &sweep)?;
    r.data("perturbed_bound", &pb)?;

    if f.dim() == 2 {
        let u = GridFunction::from_fn(a.n_grid, |x, y| 2.0 * (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin())?;
        let ec = energy_convergence_check(f.as_ref(), &u, a.rho, &a.eps)?;
        r.check(Check::new("jensen", "mollified energy <= energy on the enlarged ball", ec.dominance_ok, format!("slack {:e}", slowgrowth::approximation::JENSEN_SLACK)));
        r.check(Check::new("eps_gap", "energy gap decreases under epsilon halving", ec.gap_decreasing, "smooth bump data"));
        let mut csv = String::from("epsilon,energy,base_energy,bound,gap,dominated\n");
        for row in &ec.rows {
            csv.push_str(&format!("{:e},{:e},{:e},{:e},{:e},{}\n", row.epsilon, row.energy, row.base_energy, row.bound, row.gap, row.dominated));
        }
        r.csv("approx_eps.csv", csv);
    }
    Ok(r)
}

pub fn solve(cfg: &RunConfig) -> Result<Report> {
    let s = &cfg.solve;
    let f = density(cfg)?;
    let base = BaseData::parse(&s.boundary)?;
    let data = GridFunction::from_fn(s.n_grid, |x, y| s.scale * base.eval(x, y))?;
    let opts = SolverOptions { tol: s.tol, max_iter: s.max_iter, memory: 10, sup_radii: vec![s.rho], mean_pairs: vec![(s.rho, s.radius)] };
    let res = minimize(f.as_ref(), &data.coons_fill(), &opts)?;
    let mut r = Report::new("solve", cfg);
    r.check(Check::new("converged", "interior gradient below tolerance", res.converged, format!("residual {:e} after {} iterations", res.residual, res.iterations)));
    r.check(Check::new("descent", "final energy <= initial energy", res.energy <= res.initial_energy, format!("{:e} -> {:e}", res.initial_energy, res.energy)));
    r.data("result", &res)?;
    if let Ok(g2) = g2_sampler(&f) {
        let params = run_analysis(cfg, f.as_ref())?.params;
        let probe = step1_inequality_probe(&res.u, &g2, params.beta, s.rho, s.radius, &log_grid(1.0, 1e4, 50))?;
        r.check(Check::new("step1", "sup bound by the weighted local integral", probe.c4.is_finite() && probe.c4 > 0.0, format!("c4 = {:e}", probe.c4)));
        r.check(Check::new("plus_one", "1 + t^2 g2 <= (1/g2(1) + 1) t^2 g2 for t >= 1", probe.plus_one_ok, format!("margin {:e}", probe.plus_one_margin)));
        r.data("step1", &probe)?;
    }
    r.file("solve_grid.txt", res.u.to_text());
    Ok(r)
}

fn scale_theta(cfg: &RunConfig, f: &Density, rep: &AnalysisReport) -> Option<f64> {
    if let Some(t) = cfg.scale.theta {
        return Some(t);
    }
    if let Some(x) = &rep.exponents {
        if let Some(t) = x.theta_pq {
            return Some(t);
        }
    }
    let _ = f;
    rep.gradient_exponent.or(rep.ab.theta)
}

pub fn scale(cfg: &RunConfig) -> Result<Report> {
    let s = &cfg.scale;
    let f = density(cfg)?;
    let rep = run_analysis(cfg, f.as_ref())?;
    let mut r = Report::new("scale", cfg);
    r.check(Check::new("hypotheses", "hypothesis report passes", rep.hypotheses_pass(), "prerequisite of the study"));
    let Some(theta) = scale_theta(cfg, &f, &rep) else {
        r.check(Check::new("theta", "exponent available", false, "no exponent: condition ab fails"));
        return Ok(r);
    };
    if !rep.hypotheses_pass() && s.theta.is_none() {
        return Ok(r);
    }
    let scfg = ScalingConfig { n_grid: s.n_grid, rho: s.rho, r: s.radius, scales: s.scales.clone(), tol: s.tol, max_iter: s.max_iter, slope_tol: s.slope_tol };
    let study = scaling_study(f.as_ref(), BaseData::parse(&s.boundary)?, theta, &scfg)?;
    r.check(Check::new("complete", "every scale solved", study.aborted.is_none(), study.aborted.clone().unwrap_or_else(|| "all converged".into())));
    r.check(Check::new("slope", "fitted slope <= theta + tolerance", study.slope_ok, format!("slope {:.6}, theta {:.6}", study.fitted_slope, theta)));
    r.check(Check::new("bound", "sup |Du| <= C mean^theta at every scale", study.bound_ok && study.fitted_c.is_finite(), format!("C = {:e}", study.fitted_c)));
    r.check(Check::new("monotone", "sup |Du| non-decreasing in the scale", study.sup_monotone, "").info());
    r.check(Check::new("span", "scales span >= 1.5 decades", study.span_decades >= 1.5, format!("{:.3} decades", study.span_decades)).info());
    r.csv("scale.csv", study.to_csv());
    r.data("study", &study)?;
    Ok(r)
}

pub fn lemmas(cfg: &RunConfig) -> Result<Report> {
    let l = &cfg.lemmas;
    let mut r = Report::new("lemmas", cfg);

    let mut sched_rows = Vec::new();
    for &(n, beta, two_star) in &l.schedules {
        let s = iteration_schedule(n, beta, two_star, l.i_max)?;
        r.check(Check::new("schedule_closed_form", "recursion equals the closed form", s.max_rel_gap <= 1e-9, format!("n = {n}, beta = {beta}: gap {:e}", s.max_rel_gap)));
        if n > 2 {
            let last = *s.normalized.last().unwrap();
            let target = 2.0 - n as f64 * beta;
            r.check(Check::new("schedule_limit", "normalized exponents tend to 2 - n beta", (last - target).abs() <= 1e-6, format!("n = {n}, beta = {beta}: {last} vs {target}")));
        }
        let above = s.stays_above_two();
        let expected = s.admissibility != Admissibility::Inadmissible;
        r.check(Check::new("schedule_admissible", "delta_i >= 2 iff beta <= 1 - 2/2*", above == expected, format!("n = {n}, beta = {beta}: {:?}", s.admissibility)));
        sched_rows.push((n, beta, two_star, format!("{:?}", s.admissibility), s.limit, s.max_rel_gap));
    }
    let b: f64 = 1.0 - 2.0 / 8.0;
    let classes = [b.next_down(), b, b.next_up()].map(|beta| iteration_schedule(2, beta, 8.0, 10).map(|s| s.admissibility));
    let boundary_ok = matches!(classes, [Ok(Admissibility::Admissible), Ok(Admissibility::Boundary), Ok(Admissibility::Inadmissible)]);
    r.check(Check::new("schedule_boundary", "beta = 1 - 2/2* classified exactly", boundary_ok, "n = 2, 2* = 8, beta = 3/4 and its float neighbours"));
    r.data("schedules", &sched_rows)?;

    let spikes: Vec<Box<dyn Fn([f64; 2]) -> f64 + Sync>> = l.spike_gammas.iter().map(|&g| Box::new(spike(g)) as Box<dyn Fn([f64; 2]) -> f64 + Sync>).collect();
    let family: Vec<Field> = spikes.iter().map(|b| b.as_ref() as Field).collect();
    let coarse = interpolation_lemma_check(&family, l.theta_cap, l.lambda, &DEFAULT_RADIUS_PAIRS, l.n_grid)?;
    let fine = interpolation_lemma_check(&family, l.theta_cap, l.lambda, &DEFAULT_RADIUS_PAIRS, l.refine_grid)?;
    let drift = (coarse.conclusion_c - fine.conclusion_c).abs() / fine.conclusion_c;
    r.check(Check::new("interpolation_premise", "premise holds with a finite constant", coarse.applicable, format!("c = {:e}", coarse.premise_c)));
    r.check(Check::new(
        "interpolation",
        "uniform c_lambda over the radius pairs, stable under refinement",
        coarse.conclusion_c.is_finite() && drift < 0.05,
        format!("c_lambda = {:e} (N = {}), {:e} (N = {}), drift {:e}", coarse.conclusion_c, l.n_grid, fine.conclusion_c, l.refine_grid, drift),
    ));
    let sweep = lambda_sweep(&family, l.theta_cap, &l.lambdas, &DEFAULT_RADIUS_PAIRS, l.n_grid)?;
    r.check(
        Check::new(
            "interpolation_growth",
            "c_lambda grows as lambda decreases",
            sweep.monotone_growth,
            "for fields with sup 1, c_lambda = max (R-rho)^n / int v^lambda, which decreases as lambda decreases",
        )
        .info(),
    );
    r.data("interpolation", &coarse)?;
    r.data("lambda_sweep", &sweep)?;

    let f = density(cfg)?;
    let rep = run_analysis(cfg, f.as_ref())?;
    let g1 = |t: f64| f.g1_closed(t).unwrap_or(f64::NAN);
    let g2 = g2_sampler(&f)?;
    let mut t_grid = vec![0.0];
    t_grid.extend(log_grid(1e-2, l.t_max, l.t_points));
    let table = g1g2_integral_check(&g1, &g2, rep.params.beta, &l.gammas, rep.params.two_star, &t_grid)?;
    r.check(Check::new("g1g2_integral", "feasible C3 bounded below over gamma", table.bounded_below, format!("min C3 = {:e}", table.c3_min)));
    let one = |_: f64| 1.0;
    let beta1 = 0.5;
    let unit = g1g2_integral_check(&one, &one, beta1, &l.gammas, 4.0, &t_grid)?;
    let oracle_gap = unit
        .rows
        .iter()
        .map(|row| {
            let exact = 1.0 + lemmapaolo_integral(row.gamma / 2.0 + 1.0, row.t);
            (row.right - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    r.check(Check::new("g1g2_oracle", "quadrature matches the closed form for g1 = g2 = 1", oracle_gap <= 1e-8, format!("max relative gap {oracle_gap:e}")));
    let mut csv = String::from("gamma,t,left_coeff,right,ratio\n");
    for row in &table.rows {
        csv.push_str(&format!("{:e},{:e},{:e},{:e},{:e}\n", row.gamma, row.t, row.left_coeff, row.right, row.ratio));
    }
    r.csv("lemmas_g1g2.csv", csv);
    r.data("g1g2_c3", &table.c3)?;

    let mut alphas = l.alphas.clone();
    let top = alphas.iter().copied().fold(l.alpha0, f64::max);
    alphas.extend(log_grid(l.alpha0, top, 40));
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let lp = lemmapaolo_check(&alphas, l.alpha0, &t_grid)?;
    r.check(Check::new("power_integral", "minimal c bounded over alpha >= alpha0", lp.bounded, format!("sup c = {:e}", lp.sup_c)));
    let mut quad_gap: f64 = 0.0;
    for &alpha in &l.alphas {
        for &t in t_grid.iter().filter(|&&t| (1.0 + t).ln() * alpha < 600.0) {
            let q = integrate_adaptive(|s| (1.0 + s).powf(alpha - 2.0) * s, 0.0, t, &[], LEMMA_RTOL)?;
            let c = lemmapaolo_integral(alpha, t);
            if c != 0.0 {
                quad_gap = quad_gap.max((q - c).abs() / c.abs());
            }
        }
    }
    r.check(Check::new("power_integral_oracle", "closed form matches quadrature", quad_gap <= 1e-8, format!("max relative gap {quad_gap:e}")));
    let mut csv = String::from("alpha,min_c,worst_t\n");
    for row in &lp.rows {
        csv.push_str(&format!("{:e},{:e},{:e}\n", row.alpha, row.min_c, row.worst_t));
    }
    r.csv("lemmas_power_integral.csv", csv);
    Ok(r)
}
