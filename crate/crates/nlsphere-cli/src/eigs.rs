use clap::Args;
use nlsphere::kernels::eigen_tables;
use serde::Serialize;

use crate::io::{csv_table, emit, json_bytes, num, VERSION};
use crate::{kernel_params, CliResult, Format, OutputArgs};

#[derive(Args, Debug)]
pub struct EigsArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 32)]
    pub lmax: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Serialize)]
struct Row {
    l: usize,
    lambda: f64,
    theta: f64,
    mu: f64,
    mu_t: f64,
    tg: f64,
}

#[derive(Serialize)]
struct Report {
    version: &'static str,
    a: f64,
    delta: f64,
    rows: Vec<Row>,
}

pub fn run(args: &EigsArgs) -> CliResult<()> {
    let p = kernel_params(args.a, args.delta)?;
    let t = eigen_tables(&p, args.lmax)?;
    let rows: Vec<Row> = (0..=args.lmax)
        .map(|l| Row { l, lambda: t.lambda[l], theta: t.theta[l], mu: t.mu[l], mu_t: t.mu_t[l], tg: t.tg[l] })
        .collect();
    let bytes = match args.out.format {
        Format::Json => json_bytes(&Report { version: VERSION, a: p.a, delta: p.delta, rows })?,
        Format::Csv => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![r.l.to_string(), num(r.lambda), num(r.theta), num(r.mu), num(r.mu_t), num(r.tg)])
                .collect();
            csv_table(&["l", "Lambda", "Theta", "Mu", "MuT", "TG"], &body)?
        }
    };
    emit(&args.out, &bytes)
}
