use std::path::PathBuf;

use clap::{Args, ValueEnum};
use nlsphere::kernels::eigen_tables;
use nlsphere::operators::{apply, OperatorKind, Selector};

use crate::io::{emit, read_spectrum, write_spectrum};
use crate::{kernel_params, CliResult, Failure, OutputArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpName {
    SurfDiv,
    ScalarSurfCurl,
    SurfGrad,
    VectorSurfCurl,
    Curl,
    CurlAdjoint,
    LaplaceBeltrami,
    NonlocalLaplacian,
    Averaging,
}

impl From<OpName> for Selector {
    fn from(o: OpName) -> Self {
        match o {
            OpName::SurfDiv => Selector::SurfDiv,
            OpName::ScalarSurfCurl => Selector::ScalarSurfCurl,
            OpName::SurfGrad => Selector::SurfGrad,
            OpName::VectorSurfCurl => Selector::VectorSurfCurl,
            OpName::Curl => Selector::Curl,
            OpName::CurlAdjoint => Selector::CurlAdjoint,
            OpName::LaplaceBeltrami => Selector::LaplaceBeltrami,
            OpName::NonlocalLaplacian => Selector::NonlocalLaplacian,
            OpName::Averaging => Selector::Averaging,
        }
    }
}

#[derive(Args, Debug)]
pub struct ApplyArgs {
    /// Spectrum file, `.json` or CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub op: OpName,
    /// Use the local operator; `--a` and `--delta` are then ignored.
    #[arg(long)]
    pub local: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn run(args: &ApplyArgs) -> CliResult<()> {
    let input = read_spectrum(&args.input)?;
    let lmax = match &input {
        nlsphere::operators::Spectrum::Scalar(u) => u.lmax,
        nlsphere::operators::Spectrum::Vector(v) => v.lmax,
    };
    let sel = Selector::from(args.op);
    let out = if args.local {
        apply(&OperatorKind::local(sel), input.as_ref())?
    } else {
        let (Some(a), Some(d)) = (args.a, args.delta) else {
            return Err(Failure::Config("nonlocal operators need --a and --delta".into()));
        };
        let tables = eigen_tables(&kernel_params(a, d)?, lmax)?;
        apply(&OperatorKind::nonlocal(sel, &tables), input.as_ref())?
    };
    emit(&args.out, &write_spectrum(&out, args.out.format)?)
}
