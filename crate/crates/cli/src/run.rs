//! Command dispatch and CSV output.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use satqos::aoi::simulate_trace;
use satqos::fbc::{average_error, error_exponent, error_exponent_closed_form};
use satqos::report::num;
use satqos::snc::{delay_bound_for, optimize_paoi_bound, paoi_bound, POLE_WARNING};
use satqos::{experiments, BlockService, QosReport, ServiceModel, Table};

use crate::config::{Command, RunConfig, ServiceKind};
use crate::{CliError, BUILD_ID};

/// Runs the configured command and writes its CSV. Nothing is written when
/// the command fails.
pub fn dispatch(rc: &RunConfig) -> Result<(), CliError> {
    let comments = [format!("satqos {BUILD_ID}"), rc.resolved.clone()];
    match rc.command {
        Command::AoiSim => {
            let sm = service_model(rc)?;
            let trace = simulate_trace(&rc.arrival, &sm, rc.aoi.updates, rc.seed)?;
            write_atomic(&rc.output, |w| {
                write_comments(&mut *w, &comments)?;
                trace.write_csv(w)
            })
        }
        _ => {
            let table = compute_table(rc)?;
            write_atomic(&rc.output, |w| table.write_csv(w, &comments))
        }
    }
}

/// The result table of every command except `aoi-sim`.
pub fn compute_table(rc: &RunConfig) -> Result<Table, CliError> {
    match rc.command {
        Command::Error => error_table(rc),
        Command::Exponent => exponent_table(rc),
        Command::PaoiBound => paoi_table(rc),
        Command::DelayBound => delay_table(rc),
        Command::Sweep => Ok(experiments::run(&rc.sweep_spec())?),
        Command::AoiSim => Err(CliError::Config("aoi-sim writes a trace, not a table".into())),
    }
}

fn table(columns: &[&str]) -> Table {
    Table {
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows: Vec::new(),
    }
}

fn epsilon(rc: &RunConfig, configured: Option<f64>) -> Result<f64, CliError> {
    match configured {
        Some(e) => Ok(e),
        None => Ok(average_error(&rc.scenario, &rc.coding, &rc.error_model)?.value),
    }
}

fn service_model(rc: &RunConfig) -> Result<ServiceModel, CliError> {
    let n = rc.coding.blocklength;
    let sm = match rc.service.kind {
        ServiceKind::Fixed => ServiceModel::Fixed { n },
        ServiceKind::Arq => ServiceModel::Arq {
            n,
            epsilon: epsilon(rc, rc.service.epsilon)?,
        },
    };
    sm.validate()?;
    Ok(sm)
}

fn error_table(rc: &RunConfig) -> Result<Table, CliError> {
    let est = average_error(&rc.scenario, &rc.coding, &rc.error_model)?;
    let snr_db = 10.0 * rc.scenario.mean_received_snr()?.log10();
    let mut t = table(&[
        "epsilon",
        "std_error",
        "blocklength",
        "rate_nats",
        "mean_received_snr_db",
        "interferers",
    ]);
    t.rows.push(vec![
        num(est.value),
        est.std_error.map(num).unwrap_or_default(),
        rc.coding.blocklength.to_string(),
        num(rc.coding.rate()),
        num(snr_db),
        rc.scenario.interferers.count.to_string(),
    ]);
    Ok(t)
}

fn exponent_table(rc: &RunConfig) -> Result<Table, CliError> {
    let mut t = table(&[
        "method",
        "theta",
        "rho_star",
        "e0",
        "rate",
        "blocklength",
        "error_bound",
    ]);
    let n = rc.coding.blocklength;
    if rc.exponent.numeric {
        let x = error_exponent(&rc.scenario, &rc.coding, &rc.error_model)?;
        t.rows.push(vec![
            "numeric".into(),
            num(x.theta),
            num(x.rho_star),
            num(x.e0),
            num(x.rate),
            n.to_string(),
            num(x.report(rc.seed).bound),
        ]);
    }
    if rc.exponent.closed_form {
        let theta = error_exponent_closed_form(&rc.scenario, &rc.coding)?;
        t.rows.push(vec![
            "closed_form".into(),
            num(theta),
            String::new(),
            String::new(),
            num(rc.coding.rate()),
            n.to_string(),
            num((-(n as f64) * theta).exp()),
        ]);
    }
    Ok(t)
}

fn report_table(reports: &[QosReport]) -> Table {
    let mut t = table(&QosReport::CSV_HEADER);
    for r in reports {
        if r.kernel > POLE_WARNING {
            eprintln!(
                "warning: kernel {:e} at theta {} exceeds {:e}; theta is close to a pole",
                r.kernel, r.theta, POLE_WARNING
            );
        }
        t.rows.push(r.csv_record().to_vec());
    }
    t
}

fn paoi_table(rc: &RunConfig) -> Result<Table, CliError> {
    let sm = service_model(rc)?;
    let n = rc.coding.blocklength;
    let horizon = rc.paoi.horizon();
    let reports = rc
        .paoi
        .a_th
        .iter()
        .map(|&a| {
            let mut r = match rc.paoi.theta {
                Some(theta) => paoi_bound(theta, a, n, horizon, &rc.arrival, &sm)?,
                None => optimize_paoi_bound(a, n, horizon, &rc.arrival, &sm)?,
            };
            r.seed = rc.seed;
            Ok(r)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(report_table(&reports))
}

fn delay_table(rc: &RunConfig) -> Result<Table, CliError> {
    let arrival = rc.delay.block_arrival();
    let service = BlockService::from_coding(&rc.coding, epsilon(rc, rc.delay.epsilon)?)?;
    let reports = rc
        .delay
        .d_th
        .iter()
        .map(|&d| {
            let mut r = delay_bound_for(d, &arrival, &service)?;
            r.seed = rc.seed;
            Ok(r)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(report_table(&reports))
}

fn write_comments<W: Write>(mut w: W, comments: &[String]) -> io::Result<()> {
    for c in comments {
        for line in c.lines() {
            writeln!(w, "# {line}")?;
        }
    }
    Ok(())
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed write leaves no partial file.
fn write_atomic<F>(path: &Path, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<&mut fs::File>) -> io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        f(&mut w)?;
        w.flush()?;
    }
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        fs::set_permissions(tmp.path(), fs::Permissions::from_mode(0o644))?;
    }
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}
