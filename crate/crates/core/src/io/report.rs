use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::accounting::MixEntry;
use crate::gsa::{PdfEstimate, SobolReport};
use crate::model::ResourceCategory;
use crate::scenario::{to_mt, ScenarioResult};
use crate::solver::SolveStatus;

pub const SCHEMA_VERSION: u32 = 1;

/// JSON form of one scenario run; emissions in MtCO2-eq/y, energy in GWh/y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub dataset: String,
    pub gwp_limit_mt: Option<f64>,
    pub status: SolveStatus,
    /// Absent unless optimal.
    pub objective: Option<f64>,
    pub wall_time_s: f64,
    pub eroi: Option<f64>,
    pub e_in_tot: Option<f64>,
    pub fec_total: Option<f64>,
    pub gwp_tot_mt: Option<f64>,
    pub e_constr_by_tech: BTreeMap<String, f64>,
    pub e_op_by_res: BTreeMap<String, f64>,
    pub gwp_constr_by_tech_mt: BTreeMap<String, f64>,
    pub gwp_op_by_res_mt: BTreeMap<String, f64>,
    pub fec_by_eud: BTreeMap<String, f64>,
    pub category_shares: BTreeMap<ResourceCategory, f64>,
    pub primary_mix: Vec<MixEntry>,
    /// GW for technologies, GWh for storage.
    pub capacity: BTreeMap<String, f64>,
    pub activity: BTreeMap<String, f64>,
    pub resource_use: BTreeMap<String, f64>,
}

fn mt(map: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    map.iter().map(|(k, &v)| (k.clone(), to_mt(v))).collect()
}

impl RunReport {
    pub fn new(dataset: &str, r: &ScenarioResult) -> Self {
        let rep = r.report.as_ref();
        let map = |f: fn(&crate::accounting::AccountingReport) -> BTreeMap<String, f64>| rep.map(f).unwrap_or_default();
        RunReport {
            schema_version: SCHEMA_VERSION,
            dataset: dataset.to_string(),
            gwp_limit_mt: r.gwp_limit.map(to_mt),
            status: r.status,
            objective: rep.map(|_| r.objective),
            wall_time_s: r.wall_time.as_secs_f64(),
            eroi: r.eroi(),
            e_in_tot: rep.map(|a| a.e_in_tot),
            fec_total: rep.map(|a| a.fec_total),
            gwp_tot_mt: rep.map(|a| to_mt(a.gwp_tot)),
            e_constr_by_tech: map(|a| a.e_constr_by_tech.clone()),
            e_op_by_res: map(|a| a.e_op_by_res.clone()),
            gwp_constr_by_tech_mt: map(|a| mt(&a.gwp_constr_by_tech)),
            gwp_op_by_res_mt: map(|a| mt(&a.gwp_op_by_res)),
            fec_by_eud: map(|a| a.fec_by_eud.clone()),
            category_shares: rep.map(|a| a.category_shares()).unwrap_or_default(),
            primary_mix: rep.map(|a| a.primary_mix.clone()).unwrap_or_default(),
            capacity: map(|a| a.dispatch.capacity.clone()),
            activity: map(|a| a.dispatch.activity.clone()),
            resource_use: map(|a| a.dispatch.resource_use.clone()),
        }
    }
}

pub fn read_run_report(path: &Path) -> io::Result<RunReport> {
    let text = fs::read_to_string(path)?;
    let report: RunReport = serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("unsupported schema_version {}", report.schema_version),
        ));
    }
    Ok(report)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(w)
}

/// One row per report: headline figures and category shares.
pub fn write_summary_csv<W: Write>(reports: &[(String, RunReport)], w: W) -> csv::Result<()> {
    let mut out = writer(w);
    let mut header = vec![
        "label".to_string(),
        "gwp_limit_mt".into(),
        "status".into(),
        "eroi".into(),
        "e_in_tot_gwh".into(),
        "fec_total_gwh".into(),
        "gwp_tot_mt".into(),
    ];
    header.extend(ResourceCategory::ALL.iter().map(|c| format!("share_{}", c.as_str())));
    out.write_record(&header)?;
    for (label, r) in reports {
        let mut rec = vec![
            label.clone(),
            opt(r.gwp_limit_mt),
            r.status.to_string(),
            opt(r.eroi),
            opt(r.e_in_tot),
            opt(r.fec_total),
            opt(r.gwp_tot_mt),
        ];
        rec.extend(
            ResourceCategory::ALL
                .iter()
                .map(|c| r.category_shares.get(c).map(|v| v.to_string()).unwrap_or_default()),
        );
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Long-format primary mix: one row per report and resource.
pub fn write_mix_csv<W: Write>(reports: &[(String, RunReport)], w: W) -> csv::Result<()> {
    let mut out = writer(w);
    out.write_record(["label", "resource", "category", "renewable", "gwh", "share"])?;
    for (label, r) in reports {
        for e in &r.primary_mix {
            out.write_record([
                label.clone(),
                e.resource.clone(),
                e.category.to_string(),
                e.renewable.to_string(),
                e.gwh.to_string(),
                e.share.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Total-order indices with the critical flag.
pub fn write_indices_csv<W: Write>(report: &SobolReport, w: W) -> csv::Result<()> {
    let mut out = writer(w);
    out.write_record(["parameter", "total_order", "critical"])?;
    for (name, s) in report.parameters.iter().zip(&report.total_order) {
        let critical = report.critical.contains(name);
        out.write_record([name.clone(), s.to_string(), critical.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Histogram bins of a surrogate pdf.
pub fn write_pdf_csv<W: Write>(pdf: &PdfEstimate, w: W) -> csv::Result<()> {
    let mut out = writer(w);
    out.write_record(["bin_lo", "bin_hi", "count", "density"])?;
    for (k, (&c, &d)) in pdf.counts.iter().zip(&pdf.density).enumerate() {
        out.write_record([
            pdf.edges[k].to_string(),
            pdf.edges[k + 1].to_string(),
            c.to_string(),
            d.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
