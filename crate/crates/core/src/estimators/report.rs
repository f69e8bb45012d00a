use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateKind {
    BoxDimension,
    AssouadSpectrum,
    LowerSpectrum,
    AssouadDimension,
    LowerDimension,
    MeasureAssouadSpectrum,
    MeasureLowerSpectrum,
}

impl EstimateKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimateKind::BoxDimension => "box-dimension",
            EstimateKind::AssouadSpectrum => "assouad-spectrum",
            EstimateKind::LowerSpectrum => "lower-spectrum",
            EstimateKind::AssouadDimension => "assouad-dimension",
            EstimateKind::LowerDimension => "lower-dimension",
            EstimateKind::MeasureAssouadSpectrum => "measure-assouad-spectrum",
            EstimateKind::MeasureLowerSpectrum => "measure-lower-spectrum",
        }
    }

    /// Whether the estimate takes an infimum rather than a supremum.
    pub fn is_lower(self) -> bool {
        matches!(
            self,
            EstimateKind::LowerSpectrum
                | EstimateKind::LowerDimension
                | EstimateKind::MeasureLowerSpectrum
        )
    }
}

/// How per-scale extremal counts become a single exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Least-squares slope of `log count` against `log(R/r)`; absorbs constants.
    #[default]
    Regression,
    /// Extremal pointwise ratio `log count / log(R/r)`.
    Raw,
}

/// One coupled scale pair and the extremal count observed there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    pub r: f64,
    pub big_r: f64,
    /// Regressor: `log(R/r)`.
    pub log_ratio: f64,
    /// Response: `log` of the extremal count (or mass ratio).
    pub log_count: f64,
    /// Cloud index of the extremal centre, if any.
    pub center: Option<usize>,
    /// Oracle tag of the extremal centre, if any.
    pub tag: Option<usize>,
    /// Half-cell grid shift of the extremal box (bit per axis).
    #[serde(default)]
    pub shift: u32,
}

impl ScaleRow {
    pub fn slope(&self) -> f64 {
        self.log_count / self.log_ratio
    }
}

/// The centre and scale pair attaining the reported extremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub center: Option<usize>,
    pub coords: Vec<f64>,
    pub tag: Option<String>,
    pub r: f64,
    pub big_r: f64,
    pub count: f64,
    pub slope: f64,
    #[serde(default)]
    pub shift: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub kind: EstimateKind,
    pub theta: Option<f64>,
    pub method: Method,
    /// Estimate clamped to `[0, d]`.
    pub value: f64,
    /// Unclamped estimate.
    pub raw_value: f64,
    /// 95% half-width of the regression slope (0 for exact oracles).
    pub half_width: f64,
    pub witness: Witness,
    pub rows: Vec<ScaleRow>,
}

/// Least-squares fit `y = a + s x`; returns `(s, a, standard error of s)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::Window(
            "regression needs at least two scale pairs".into(),
        ));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Window(
            "regression needs at least two distinct scale ratios".into(),
        ));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let s = sxy / sxx;
    let a = my - s * mx;
    let se = if n > 2 {
        let rss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - s * u).powi(2)).sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    Ok((s, a, se))
}

/// Turns rows into `(raw value, half-width, index of the witnessing row)`.
pub(crate) fn summarize(
    rows: &[ScaleRow],
    method: Method,
    lower: bool,
) -> Result<(f64, f64, usize)> {
    if rows.is_empty() {
        return Err(Error::Window(
            "no admissible scale pairs in the window".into(),
        ));
    }
    let pick = |a: f64, b: f64| if lower { a < b } else { a > b };
    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if pick(r.slope(), rows[best].slope()) {
            best = i;
        }
    }
    let x: Vec<f64> = rows.iter().map(|r| r.log_ratio).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.log_count).collect();
    let fit = linear_fit(&x, &y);
    match method {
        Method::Regression => {
            let (s, _, se) = fit?;
            Ok((s, 1.96 * se, best))
        }
        Method::Raw => Ok((
            rows[best].slope(),
            fit.map(|f| 1.96 * f.2).unwrap_or(f64::INFINITY),
            best,
        )),
    }
}

impl EstimateReport {
    /// Recomputes the value from the stored rows.
    pub fn value_from_rows(&self) -> Result<f64> {
        Ok(summarize(&self.rows, self.method, self.kind.is_lower())?.0)
    }
}

/// Column names of [`reports_to_csv`] and [`outcomes_to_csv`].
pub const CSV_HEADER: &[&str] = &[
    "kind",
    "theta",
    "value",
    "half_width",
    "raw_value",
    "method",
    "witness_center",
    "witness_x",
    "witness_y",
    "witness_z",
    "witness_tag",
    "witness_r",
    "witness_R",
    "witness_count",
    "witness_shift",
    "status",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn record(r: &EstimateReport) -> Vec<String> {
    let c = |i: usize| opt(r.witness.coords.get(i));
    vec![
        r.kind.name().to_string(),
        opt(r.theta),
        r.value.to_string(),
        r.half_width.to_string(),
        r.raw_value.to_string(),
        match r.method {
            Method::Regression => "regression".into(),
            Method::Raw => "raw".into(),
        },
        opt(r.witness.center),
        c(0),
        c(1),
        c(2),
        r.witness.tag.clone().unwrap_or_default(),
        r.witness.r.to_string(),
        r.witness.big_r.to_string(),
        r.witness.count.to_string(),
        r.witness.shift.to_string(),
        "ok".to_string(),
    ]
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::Format(e.to_string()))
}

/// One CSV row per report.
pub fn reports_to_csv(reports: &[EstimateReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in reports {
        w.write_record(record(r))?;
    }
    finish(w)
}

/// One CSV row per θ; failed estimates keep their row with empty values
/// and the error message in `status`.
pub fn outcomes_to_csv(
    kind: EstimateKind,
    outcomes: &[(f64, Result<EstimateReport>)],
) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for (theta, outcome) in outcomes {
        match outcome {
            Ok(r) => w.write_record(record(r))?,
            Err(e) => {
                let mut row = vec![String::new(); CSV_HEADER.len()];
                row[0] = kind.name().to_string();
                row[1] = theta.to_string();
                row[CSV_HEADER.len() - 1] = format!("infeasible: {e}");
                w.write_record(row)?;
            }
        }
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(x: f64, y: f64) -> ScaleRow {
        ScaleRow {
            r: 1.0,
            big_r: x.exp(),
            log_ratio: x,
            log_count: y,
            center: None,
            tag: None,
            shift: 0,
        }
    }

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 + 1.3 * v).collect();
        let (s, a, se) = linear_fit(&x, &y).unwrap();
        assert!((s - 1.3).abs() < 1e-12 && (a - 0.5).abs() < 1e-12 && se < 1e-7);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn summaries() {
        let rows = vec![row(1.0, 1.5), row(2.0, 2.5), row(3.0, 3.5), row(4.0, 4.5)];
        let (v, hw, w) = summarize(&rows, Method::Regression, false).unwrap();
        assert!((v - 1.0).abs() < 1e-12 && hw < 1e-6 && w == 0);
        let (v, _, w) = summarize(&rows, Method::Raw, false).unwrap();
        assert!((v - 1.5).abs() < 1e-12 && w == 0);
        let (v, _, w) = summarize(&rows, Method::Raw, true).unwrap();
        assert!((v - 4.5 / 4.0).abs() < 1e-12 && w == 3);
        assert!(summarize(&[], Method::Raw, true).is_err());
    }

    #[test]
    fn csv_shape() {
        let rows = vec![row(1.0, 1.0), row(2.0, 2.0)];
        let rep = EstimateReport {
            kind: EstimateKind::AssouadSpectrum,
            theta: Some(0.5),
            method: Method::Regression,
            value: 1.0,
            raw_value: 1.0,
            half_width: 0.0,
            witness: Witness {
                center: Some(3),
                coords: vec![0.1],
                tag: None,
                r: 0.1,
                big_r: 0.2,
                count: 2.0,
                slope: 1.0,
                shift: 0,
            },
            rows,
        };
        let bytes = reports_to_csv(&[rep.clone(), rep.clone()]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("kind,theta,value"));
        assert!(text.lines().skip(1).all(|l| l.ends_with(",ok")));

        let outcomes = vec![
            (0.5, Ok(rep)),
            (0.9, Err(Error::Window("too narrow".into()))),
        ];
        let bytes = outcomes_to_csv(EstimateKind::AssouadSpectrum, &outcomes).unwrap();
        let mut rdr = csv::Reader::from_reader(bytes.as_slice());
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(&rows[0][CSV_HEADER.len() - 1], "ok");
        let bad = &rows[1];
        assert_eq!(bad.len(), CSV_HEADER.len());
        assert_eq!((&bad[0], &bad[1], &bad[2]), ("assouad-spectrum", "0.9", ""));
        assert!(bad[CSV_HEADER.len() - 1].starts_with("infeasible: "));
        assert!(bad[CSV_HEADER.len() - 1].contains("too narrow"));
    }
}
