use std::f64::consts::PI;
use std::path::PathBuf;

use clap::Args;
use nlsphere::geometry::UnitVector3;
use nlsphere::harmonics::{
    random_scalar_spectrum, random_vector_spectrum, scalar_synthesis, vector_synthesis, HarmonicMode, ScalarSpectrum,
    SpectrumRef, VectorSpectrum,
};
use nlsphere::kernels::{eigen_tables, EigenTables, KernelParams};
use nlsphere::operators::{apply, Locality, OperatorKind, Selector, Spectrum};
use nlsphere::oracle::{
    AdjointInputs, AdjointPair, Field, FieldValue, Identity, LocalizationKernel, Oracle, OracleConfig, Resolution,
    WeightedKind,
};
use nlsphere::quadrature::{surface_integral, SphereGrid};
use nlsphere::stokes::{stokes_residual, zonal_closed_form, Cap};
use nlsphere::Complex64;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::io::{emit, json_bytes, VERSION};
use crate::{kernel_params, CliResult, Failure, Format, OutputArgs};

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.5)]
    pub a: f64,
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    #[arg(long, default_value_t = 6)]
    pub lmax: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random evaluation points per pointwise check.
    #[arg(long, default_value_t = 4)]
    pub points: usize,
    /// Starting radial nodes of the quadrature oracle.
    #[arg(long, default_value_t = 16)]
    pub n_radial: usize,
    /// Starting azimuthal nodes of the quadrature oracle.
    #[arg(long, default_value_t = 16)]
    pub n_azimuthal: usize,
    /// Relative change accepted between oracle refinements.
    #[arg(long, default_value_t = 1e-11)]
    pub oracle_tol: f64,
    #[arg(long, default_value_t = 4)]
    pub max_doublings: usize,
    /// Report file; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Seeded standard normal stream.
pub fn normal(seed: u64) -> impl FnMut() -> f64 {
    let mut rng = StdRng::seed_from_u64(seed);
    move || StandardNormal.sample(&mut rng)
}

#[derive(Serialize, Debug, Clone, Copy)]
pub struct ParamsOut {
    pub a: f64,
    pub delta: f64,
}

#[derive(Serialize, Debug, Clone, Copy)]
pub struct ResolutionOut {
    pub n_radial: usize,
    pub n_azimuthal: usize,
}

impl From<Resolution> for ResolutionOut {
    fn from(r: Resolution) -> Self {
        Self { n_radial: r.n_radial, n_azimuthal: r.n_azimuthal }
    }
}

#[derive(Serialize, Debug, Clone)]
pub struct Record {
    pub suite: &'static str,
    pub identity: String,
    pub params: ParamsOut,
    pub l: Option<usize>,
    pub m: Option<i64>,
    pub residual: f64,
    pub resolution: Option<ResolutionOut>,
}

#[derive(Serialize)]
struct Config {
    a: f64,
    delta: f64,
    lmax: usize,
    tol: f64,
    seed: u64,
    points: usize,
    n_radial: usize,
    n_azimuthal: usize,
    oracle_tol: f64,
    max_doublings: usize,
}

#[derive(Serialize)]
struct Report<'a> {
    version: &'static str,
    config: Config,
    passed: bool,
    max_residual: f64,
    records: &'a [Record],
}

struct Ctx {
    params: KernelParams,
    out: ParamsOut,
    lmax: usize,
    tables: EigenTables,
    oracle: Oracle,
    u: ScalarSpectrum,
    v: VectorSpectrum,
    w: VectorSpectrum,
    points: Vec<UnitVector3>,
}

impl Ctx {
    fn record(&self, suite: &'static str, identity: impl Into<String>, residual: f64) -> Record {
        Record { suite, identity: identity.into(), params: self.out, l: None, m: None, residual, resolution: None }
    }
}

fn random_points(n: usize, seed: u64) -> Vec<UnitVector3> {
    let mut g = normal(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if let Ok(p) = UnitVector3::from_array([g(), g(), g()]) {
            out.push(p);
        }
    }
    out
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    let s = a.norm().max(b.norm());
    if s < 1e-14 {
        (a - b).norm()
    } else {
        (a - b).norm() / s
    }
}

fn inner_s(grid: &SphereGrid, a: &ScalarSpectrum, b: &ScalarSpectrum) -> CliResult<Complex64> {
    let (x, y) = (scalar_synthesis(grid, a), scalar_synthesis(grid, b));
    let p: Vec<Complex64> = x.iter().zip(&y).map(|(p, q)| p.conj() * q).collect();
    Ok(surface_integral(grid, &p)?)
}

fn inner_v(grid: &SphereGrid, a: &VectorSpectrum, b: &VectorSpectrum) -> CliResult<Complex64> {
    let (x, y) = (vector_synthesis(grid, a), vector_synthesis(grid, b));
    let p: Vec<Complex64> = x.iter().zip(&y).map(|(p, q)| p.conj().dot(*q)).collect();
    Ok(surface_integral(grid, &p)?)
}

fn operator_suite(c: &Ctx) -> CliResult<Vec<Record>> {
    let mut out = Vec::new();
    let t = &c.tables;
    let mut r = c.record("operators", "normalization", (t.lambda[0] - 1.0).abs());
    r.l = Some(0);
    out.push(r);
    let d = c.params.delta;
    if d <= 0.25 {
        let (mut el, mut et): (f64, f64) = (0.0, 0.0);
        for l in 0..=c.lmax {
            let ll = (l * (l + 1)) as f64;
            el = el.max((t.lambda[l] - 1.0).abs() - ll * d * d / 4.0);
            et = et.max((t.theta[l] - 1.0).abs() - (ll + 1.0) * d);
        }
        out.push(c.record("operators", "lambda-bound-excess", el.max(0.0)));
        out.push(c.record("operators", "theta-bound-excess", et.max(0.0)));
    }
    let grid = SphereGrid::for_degree(c.lmax);
    let inputs = AdjointInputs { u: &c.u, v: &c.v, w: &c.w };
    for pair in [AdjointPair::LocalDivGrad, AdjointPair::LocalCurls, AdjointPair::LocalCurl] {
        out.push(c.record("operators", pair.name(), c.oracle.adjointness_residual(pair, inputs, &grid)?));
    }
    let nl = |s: Selector, x: SpectrumRef<'_>| apply(&OperatorKind::nonlocal(s, t), x);
    let (u, v, w) = (SpectrumRef::Scalar(&c.u), SpectrumRef::Vector(&c.v), SpectrumRef::Vector(&c.w));
    let du = nl(Selector::SurfDiv, v)?.into_scalar()?;
    let gu = nl(Selector::SurfGrad, u)?.into_vector()?;
    let lhs = inner_s(&grid, &c.u, &du)?;
    out.push(c.record("operators", "spectral-weighted-div-grad", rel(lhs, -inner_v(&grid, &gu, &c.v)?)));
    let cs = nl(Selector::ScalarSurfCurl, v)?.into_scalar()?;
    let cv = nl(Selector::VectorSurfCurl, u)?.into_vector()?;
    let lhs = inner_s(&grid, &c.u, &cs)?;
    out.push(c.record("operators", "spectral-weighted-curls", rel(lhs, inner_v(&grid, &cv, &c.v)?)));
    let cc = nl(Selector::Curl, v)?.into_vector()?;
    let ca = nl(Selector::CurlAdjoint, w)?.into_vector()?;
    let lhs = inner_v(&grid, &c.w, &cc)?;
    out.push(c.record("operators", "spectral-weighted-curl", rel(lhs, inner_v(&grid, &ca, &c.v)?)));
    Ok(out)
}

fn oracle_suite(c: &Ctx) -> CliResult<Vec<Record>> {
    let mut out = Vec::new();
    let uf = |p: UnitVector3| c.u.eval(p);
    let vf = |p: UnitVector3| c.v.eval(p);
    let kinds = [
        (WeightedKind::SurfDiv, Selector::SurfDiv),
        (WeightedKind::ScalarSurfCurl, Selector::ScalarSurfCurl),
        (WeightedKind::SurfGrad, Selector::SurfGrad),
        (WeightedKind::VectorSurfCurl, Selector::VectorSurfCurl),
        (WeightedKind::Curl, Selector::Curl),
        (WeightedKind::CurlAdjoint, Selector::CurlAdjoint),
        (WeightedKind::Averaging, Selector::Averaging),
    ];
    for (kind, sel) in kinds {
        let (field, input) = if sel.takes_vector() {
            (Field::Vector(&vf), SpectrumRef::Vector(&c.v))
        } else {
            (Field::Scalar(&uf), SpectrumRef::Scalar(&c.u))
        };
        let spectral = apply(&OperatorKind::nonlocal(sel, &c.tables), input)?;
        let per_point: Vec<CliResult<(f64, Resolution)>> = c
            .points
            .par_iter()
            .map(|&x| {
                let q = c.oracle.quadrature_apply_weighted(kind, field, x)?;
                let s = match &spectral {
                    Spectrum::Scalar(s) => FieldValue::Scalar(s.eval(x)),
                    Spectrum::Vector(s) => FieldValue::Vector(s.eval(x)),
                };
                let d = q.value.distance(s).ok_or_else(|| Failure::Config("operator kind mismatch".into()))?;
                Ok((d / s.norm().max(1.0), q.resolution))
            })
            .collect();
        let mut worst: f64 = 0.0;
        let mut res = Resolution { n_radial: 0, n_azimuthal: 0 };
        for r in per_point {
            let (e, q) = r?;
            worst = worst.max(e);
            res = Resolution { n_radial: res.n_radial.max(q.n_radial), n_azimuthal: res.n_azimuthal.max(q.n_azimuthal) };
        }
        let mut rec = c.record("oracle", format!("diagonalization-{kind:?}"), worst);
        rec.resolution = Some(res.into());
        out.push(rec);
    }

    let grid = SphereGrid::for_degree(c.lmax);
    let inputs = AdjointInputs { u: &c.u, v: &c.v, w: &c.w };
    for pair in [AdjointPair::WeightedDivGrad, AdjointPair::WeightedCurls, AdjointPair::WeightedCurl] {
        out.push(c.record("oracle", pair.name(), c.oracle.adjointness_residual(pair, inputs, &grid)?));
    }

    let comp = c.oracle.composition_residual(&c.u, &c.points)?;
    let mut rec = c.record("oracle", "composition", comp.residual());
    rec.l = Some(c.lmax);
    rec.resolution = Some(comp.resolution.into());
    out.push(rec);

    for kernel in [LocalizationKernel::Gamma, LocalizationKernel::Mu] {
        let tables = c.oracle.localization_tables(kernel, c.lmax)?;
        let mut cases = Vec::new();
        for id in Identity::ALL {
            let local_form = matches!(
                id,
                Identity::L1 | Identity::L2 | Identity::L3 | Identity::L4 | Identity::L5 | Identity::L6
            );
            if local_form && tables.f_prime.is_none() {
                continue;
            }
            for l in 0..=c.lmax {
                cases.push((id, l));
            }
        }
        let recs: Vec<CliResult<Record>> = cases
            .par_iter()
            .map(|&(id, l)| {
                let mut worst: f64 = 0.0;
                let mut res = Resolution { n_radial: 0, n_azimuthal: 0 };
                for m in -(l as i64)..=(l as i64) {
                    let r = c.oracle.localization_residual(id, l, m, &tables, &c.points)?;
                    worst = worst.max(r.residual);
                    res = Resolution {
                        n_radial: res.n_radial.max(r.resolution.n_radial),
                        n_azimuthal: res.n_azimuthal.max(r.resolution.n_azimuthal),
                    };
                }
                let mut rec = c.record("oracle", format!("localization-{kernel:?}-{}", id.name()), worst);
                rec.l = Some(l);
                rec.resolution = Some(res.into());
                Ok(rec)
            })
            .collect();
        for r in recs {
            out.push(r?);
        }
    }
    Ok(out)
}

fn stokes_suite(c: &Ctx) -> CliResult<Vec<Record>> {
    let mut out = Vec::new();
    let zonal = VectorSpectrum::mode(c.lmax.max(1), HarmonicMode::CrossGradY, 1, 0)?;
    let zt = eigen_tables(&c.params, zonal.lmax)?;
    for theta0 in [PI / 6.0, PI / 2.0, 0.75 * PI] {
        let cap = Cap::new(theta0)?;
        let r = stokes_residual(&c.v, &cap, Locality::Nonlocal(&c.tables))?;
        out.push(c.record("stokes", format!("stokes-theta0={theta0:.6}"), r.residual));
        let z = stokes_residual(&zonal, &cap, Locality::Nonlocal(&zt))?;
        let exact = Complex64::new(zonal_closed_form(zt.lambda[1], &cap), 0.0);
        let e = (z.lhs - exact).norm().max((z.rhs - exact).norm());
        let mut rec = c.record("stokes", format!("zonal-theta0={theta0:.6}"), e);
        rec.l = Some(1);
        rec.m = Some(0);
        out.push(rec);
    }
    Ok(out)
}

pub fn records(args: &VerifyArgs) -> CliResult<Vec<Record>> {
    if !(args.tol > 0.0) {
        return Err(Failure::Config("tolerance must be positive".into()));
    }
    if args.points == 0 || args.n_radial == 0 || args.n_azimuthal == 0 {
        return Err(Failure::Config("point and node counts must be positive".into()));
    }
    if !(args.oracle_tol >= 0.0) {
        return Err(Failure::Config("oracle tolerance must be non-negative".into()));
    }
    let params = kernel_params(args.a, args.delta)?;
    let mut n = normal(args.seed);
    let ctx = Ctx {
        params,
        out: ParamsOut { a: params.a, delta: params.delta },
        lmax: args.lmax,
        tables: eigen_tables(&params, args.lmax)?,
        oracle: Oracle::new(
            params,
            OracleConfig {
                start: Resolution { n_radial: args.n_radial, n_azimuthal: args.n_azimuthal },
                tol: args.oracle_tol,
                max_doublings: args.max_doublings,
                ..OracleConfig::default()
            },
        )?,
        u: random_scalar_spectrum(args.lmax, &mut n),
        v: random_vector_spectrum(args.lmax, &mut n),
        w: random_vector_spectrum(args.lmax, &mut n),
        points: random_points(args.points, args.seed.wrapping_add(1)),
    };
    let mut out = operator_suite(&ctx)?;
    out.extend(oracle_suite(&ctx)?);
    out.extend(stokes_suite(&ctx)?);
    Ok(out)
}

pub fn run(args: &VerifyArgs) -> CliResult<()> {
    let recs = records(args)?;
    let max_residual = recs.iter().map(|r| r.residual).fold(0.0, f64::max);
    let failed: Vec<&Record> = recs.iter().filter(|r| !(r.residual <= args.tol)).collect();
    let report = Report {
        version: VERSION,
        config: Config {
            a: args.a,
            delta: args.delta,
            lmax: args.lmax,
            tol: args.tol,
            seed: args.seed,
            points: args.points,
            n_radial: args.n_radial,
            n_azimuthal: args.n_azimuthal,
            oracle_tol: args.oracle_tol,
            max_doublings: args.max_doublings,
        },
        passed: failed.is_empty(),
        max_residual,
        records: &recs,
    };
    let out = OutputArgs { output: args.output.clone(), format: Format::Json };
    emit(&out, &json_bytes(&report)?)?;
    if failed.is_empty() {
        Ok(())
    } else {
        let names: Vec<String> = failed.iter().take(5).map(|r| format!("{} ({:.2e})", r.identity, r.residual)).collect();
        Err(Failure::Verification(format!("{} of {} residuals above {:e}: {}", failed.len(), recs.len(), args.tol, names.join(", "))))
    }
}
