//! CSV layouts for plot data and result tables.

use takeover_core::explain::{DependenceData, GlobalImportance};
use takeover_core::metrics::MetricsReport;
use takeover_core::pipeline::{BinReport, SelectionReport};

use crate::table::number;
use crate::FormatError;

fn opt(x: Option<f64>) -> String {
    x.map(number).unwrap_or_default()
}

fn render<I, R>(header: &[&str], rows: I) -> Result<String, FormatError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| FormatError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Columns `feature_set, rmse, mae, adj_r2, corr`; one row per prefix, the
/// feature set written as names joined by ` + `.
pub fn selection_csv(r: &SelectionReport) -> Result<String, FormatError> {
    let mut names: Vec<&str> = Vec::new();
    let rows = r.steps.iter().map(|s| {
        names.push(&s.feature_added);
        let m = &s.report.mean;
        vec![names.join(" + "), number(m.rmse), number(m.mae), opt(m.adj_r2), opt(m.corr)]
    });
    render(&["feature_set", "rmse", "mae", "adj_r2", "corr"], rows.collect::<Vec<_>>())
}

/// Columns `upper_bound, samples, rmse, adj_r2, mae, min_mae, max_mae, corr`;
/// skipped bins leave the metric cells empty.
pub fn bins_csv(r: &BinReport) -> Result<String, FormatError> {
    let rows = r.rows.iter().map(|b| {
        let m: Option<&MetricsReport> = b.metrics.as_ref();
        vec![
            number(b.upper_bound),
            b.sample_count.to_string(),
            opt(m.map(|m| m.rmse)),
            opt(m.and_then(|m| m.adj_r2)),
            opt(m.map(|m| m.mae)),
            opt(b.min_mae),
            opt(b.max_mae),
            opt(m.and_then(|m| m.corr)),
        ]
    });
    render(&["upper_bound", "samples", "rmse", "adj_r2", "mae", "min_mae", "max_mae", "corr"], rows)
}

/// Columns `feature_value, main_effect, phi_total, color_feature, color_value`.
pub fn dependence_csv(d: &DependenceData) -> Result<String, FormatError> {
    let color = d.color_feature.clone().unwrap_or_default();
    let rows = d.records.iter().map(|r| vec![opt(r.feature_value), number(r.main_effect), number(r.phi_total), color.clone(), opt(r.color_value)]);
    render(&["feature_value", "main_effect", "phi_total", "color_feature", "color_value"], rows)
}

/// Columns `rank, variable, score`.
pub fn importance_csv(g: &GlobalImportance) -> Result<String, FormatError> {
    let rows = g.ranking.iter().enumerate().map(|(i, r)| vec![(i + 1).to_string(), r.variable.clone(), number(r.score)]);
    render(&["rank", "variable", "score"], rows)
}

/// Columns `row, prediction`, rows counted from 1.
pub fn predictions_csv(predictions: &[f64]) -> Result<String, FormatError> {
    let rows = predictions.iter().enumerate().map(|(i, p)| vec![(i + 1).to_string(), number(*p)]);
    render(&["row", "prediction"], rows)
}

/// Pretty JSON with a trailing newline.
pub fn json<T: serde::Serialize>(value: &T) -> Result<String, FormatError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use takeover_core::pipeline::{BinRow, CVReport, SelectionStep};

    fn report(rmse: f64) -> CVReport {
        let m = MetricsReport { rmse, mae: rmse / 2.0, adj_r2: Some(0.5), adj_r2_standard: Some(0.4), corr: None, n: 10, m: 1 };
        CVReport { per_seed: vec![], mean: m, min_mae: 0.1, max_mae: 0.2, feature_set: vec![], params: None }
    }

    #[test]
    fn selection_rows_accumulate_names() {
        let r = SelectionReport {
            importance: vec![],
            steps: vec![
                SelectionStep { feature_added: "URG".into(), report: report(1.25) },
                SelectionStep { feature_added: "TBTC&TBTB".into(), report: report(1.0) },
            ],
            chosen: vec!["URG".into(), "TBTC&TBTB".into()],
        };
        let text = selection_csv(&r).unwrap();
        assert_eq!(text, "feature_set,rmse,mae,adj_r2,corr\nURG,1.25,0.625,0.5,\nURG + TBTC&TBTB,1,0.5,0.5,\n");
    }

    #[test]
    fn skipped_bins_have_blank_metrics() {
        let r = BinReport { rows: vec![BinRow { upper_bound: 2.0, sample_count: 3, metrics: None, min_mae: None, max_mae: None, warning: Some("x".into()) }] };
        assert_eq!(bins_csv(&r).unwrap(), "upper_bound,samples,rmse,adj_r2,mae,min_mae,max_mae,corr\n2,3,,,,,,\n");
    }
}
