//! Country-by-year indicator panels.
//!
//! A panel is a rectangular table: one row per country, one column per year,
//! with holes where an observation is missing. Input arrives as "wide" CSV,
//! the layout the World Bank and Eurostat bulk extracts use once pivoted:
//!
//! ```text
//! country,2005,2006,2007
//! SVN,24.1,23.8,
//! CZE,26.0,,25.3
//! ```
//!
//! An empty cell is a missing observation. Parsing is strict: a malformed
//! header, an unreadable cell, a duplicate country, or a ragged row is an
//! error naming the offending row and column, never a silent repair.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Three-letter uppercase country identifier (ISO 3166-1 alpha-3 style).
///
/// Fits in a register and is `Copy`, so panels and matrices label rows with
/// the code itself rather than an index into a side table.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountryCode([u8; 3]);

impl CountryCode {
    /// Accepts exactly three ASCII uppercase letters.
    pub fn new(code: &str) -> Result<Self> {
        let bytes = code.as_bytes();
        if bytes.len() == 3 && bytes.iter().all(|b| b.is_ascii_uppercase()) {
            Ok(CountryCode([bytes[0], bytes[1], bytes[2]]))
        } else {
            Err(Error::InvalidCountryCode { code: code.into() })
        }
    }

    pub fn as_str(&self) -> &str {
        // Invariant: only ASCII uppercase gets stored.
        std::str::from_utf8(&self.0).expect("country code is ASCII")
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CountryCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CountryCode::new(s)
    }
}

impl Serialize for CountryCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// Which indicator a panel carries. Determines the default cleaning policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IndicatorKind {
    /// Gini index of income inequality, in percent (0..100).
    Gini,
    /// Gross domestic savings, percent of GDP. May be legitimately negative,
    /// but negative values are excluded by default: a dissaving economy is
    /// outside the regime the savings-exchange analogy speaks to.
    Gds,
}

impl IndicatorKind {
    /// Whether cleaning should blank negative observations by default.
    pub fn drops_negative_by_default(self) -> bool {
        match self {
            IndicatorKind::Gini => false,
            IndicatorKind::Gds => true,
        }
    }
}

impl fmt::Display for IndicatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndicatorKind::Gini => "gini",
            IndicatorKind::Gds => "gds",
        })
    }
}

impl FromStr for IndicatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gini" => Ok(IndicatorKind::Gini),
            "gds" => Ok(IndicatorKind::Gds),
            other => Err(Error::InvalidPolicy {
                detail: format!("unknown indicator {other:?} (want \"gini\" or \"gds\")"),
            }),
        }
    }
}

/// How raw observations are filtered before analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CleaningPolicy {
    /// Blank out negative observations (treat them as missing).
    pub drop_negative: bool,
    min_overlap: usize,
}

impl CleaningPolicy {
    /// Fewest overlapping years any pairwise statistic may be computed on.
    /// Below this a correlation is mostly noise.
    pub const MIN_OVERLAP_FLOOR: usize = 3;

    /// Default number of overlapping years required for pairwise statistics.
    pub const DEFAULT_MIN_OVERLAP: usize = 8;

    pub fn new(drop_negative: bool, min_overlap: usize) -> Result<Self> {
        if min_overlap < Self::MIN_OVERLAP_FLOOR {
            return Err(Error::InvalidPolicy {
                detail: format!(
                    "min_overlap {min_overlap} below floor {}",
                    Self::MIN_OVERLAP_FLOOR
                ),
            });
        }
        Ok(CleaningPolicy {
            drop_negative,
            min_overlap,
        })
    }

    /// The conventional policy for an indicator: negatives are dropped for
    /// savings data, kept for Gini data; overlap defaults to
    /// [`Self::DEFAULT_MIN_OVERLAP`] years.
    pub fn for_indicator(kind: IndicatorKind) -> Self {
        CleaningPolicy {
            drop_negative: kind.drops_negative_by_default(),
            min_overlap: Self::DEFAULT_MIN_OVERLAP,
        }
    }

    pub fn min_overlap(&self) -> usize {
        self.min_overlap
    }

    pub fn with_min_overlap(self, min_overlap: usize) -> Result<Self> {
        Self::new(self.drop_negative, min_overlap)
    }

    pub fn with_drop_negative(self, drop_negative: bool) -> Self {
        CleaningPolicy {
            drop_negative,
            ..self
        }
    }
}

/// Two series restricted to the years where both are observed.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair {
    /// Years present in both series, ascending.
    pub years: Vec<i32>,
    /// First country's values, one per year in `years`.
    pub left: Vec<f64>,
    /// Second country's values, one per year in `years`.
    pub right: Vec<f64>,
}

impl AlignedPair {
    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }
}

/// A rectangular country-by-year table of one indicator, with missing cells.
///
/// Invariants, enforced at construction: country codes are unique, years are
/// strictly increasing, the value buffer is exactly `countries x years`, and
/// every present value is finite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeriesPanel {
    indicator: IndicatorKind,
    countries: Vec<CountryCode>,
    years: Vec<i32>,
    /// Row-major: `values[c * years.len() + y]`.
    values: Vec<Option<f64>>,
}

impl TimeSeriesPanel {
    pub fn new(
        indicator: IndicatorKind,
        countries: Vec<CountryCode>,
        years: Vec<i32>,
        values: Vec<Option<f64>>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, c) in countries.iter().enumerate() {
            if !seen.insert(c) {
                return Err(Error::DuplicateCountry {
                    line: i + 2,
                    code: *c,
                });
            }
        }
        if !years.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::MalformedHeader {
                detail: "year columns must be strictly increasing".into(),
            });
        }
        if values.len() != countries.len() * years.len() {
            return Err(Error::InvalidMatrix {
                detail: format!(
                    "value buffer holds {} cells, panel shape is {} x {}",
                    values.len(),
                    countries.len(),
                    years.len()
                ),
            });
        }
        for (idx, v) in values.iter().enumerate() {
            if let Some(x) = v {
                if !x.is_finite() {
                    return Err(Error::BadValueCell {
                        code: countries[idx / years.len().max(1)].to_string(),
                        year: years[idx % years.len().max(1)],
                        cell: x.to_string(),
                    });
                }
            }
        }
        Ok(TimeSeriesPanel {
            indicator,
            countries,
            years,
            values,
        })
    }

    /// Parses wide-format CSV. The header must be `country` followed by
    /// strictly increasing integer years; each row is a code followed by one
    /// cell per year, empty meaning missing. Cells are trimmed; a UTF-8 BOM
    /// on the header is tolerated.
    pub fn parse_csv(text: &str, indicator: IndicatorKind) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::MalformedHeader {
            detail: "input is empty".into(),
        })?;
        let header = header.trim_start_matches('\u{feff}');
        let fields: Vec<&str> = header.split(',').collect();
        if !fields[0].trim().eq_ignore_ascii_case("country") {
            return Err(Error::MalformedHeader {
                detail: format!(
                    "first column must be \"country\", found {:?}",
                    fields[0].trim()
                ),
            });
        }
        let mut years = Vec::with_capacity(fields.len() - 1);
        for (i, f) in fields[1..].iter().enumerate() {
            let year: i32 = f.trim().parse().map_err(|_| Error::MalformedHeader {
                detail: format!("column {} is not an integer year: {:?}", i + 2, f.trim()),
            })?;
            if let Some(&prev) = years.last() {
                if year <= prev {
                    return Err(Error::MalformedHeader {
                        detail: format!(
                            "year columns must be strictly increasing ({prev} then {year})"
                        ),
                    });
                }
            }
            years.push(year);
        }

        let mut countries = Vec::new();
        let mut values = Vec::new();
        let mut seen = HashSet::new();
        for (idx, raw) in lines {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = raw.split(',').collect();
            let code_raw = fields[0].trim();
            let code = CountryCode::new(code_raw).map_err(|_| Error::InvalidRowCode {
                line,
                code: code_raw.into(),
            })?;
            if !seen.insert(code) {
                return Err(Error::DuplicateCountry { line, code });
            }
            if fields.len() != years.len() + 1 {
                return Err(Error::RaggedRow {
                    line,
                    code: code_raw.into(),
                    expected: years.len() + 1,
                    found: fields.len(),
                });
            }
            for (k, cell) in fields[1..].iter().enumerate() {
                let cell = cell.trim();
                if cell.is_empty() {
                    values.push(None);
                    continue;
                }
                let v: f64 = cell.parse().map_err(|_| Error::BadValueCell {
                    code: code_raw.into(),
                    year: years[k],
                    cell: cell.into(),
                })?;
                if !v.is_finite() {
                    return Err(Error::BadValueCell {
                        code: code_raw.into(),
                        year: years[k],
                        cell: cell.into(),
                    });
                }
                values.push(Some(v));
            }
            countries.push(code);
        }
        TimeSeriesPanel::new(indicator, countries, years, values)
    }

    /// Emits the same wide CSV layout `parse_csv` reads. Values print in
    /// shortest round-trip form, so `parse_csv(panel.to_csv())` reproduces
    /// the panel exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("country");
        for y in &self.years {
            out.push(',');
            out.push_str(&y.to_string());
        }
        out.push('\n');
        let ny = self.years.len();
        for (ci, code) in self.countries.iter().enumerate() {
            out.push_str(code.as_str());
            for yi in 0..ny {
                out.push(',');
                if let Some(v) = self.values[ci * ny + yi] {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn indicator(&self) -> IndicatorKind {
        self.indicator
    }

    pub fn countries(&self) -> &[CountryCode] {
        &self.countries
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn n_countries(&self) -> usize {
        self.countries.len()
    }

    pub fn n_years(&self) -> usize {
        self.years.len()
    }

    pub fn country_index(&self, code: CountryCode) -> Option<usize> {
        self.countries.iter().position(|c| *c == code)
    }

    /// Value at (country row, year column), `None` if missing.
    pub fn get(&self, country: usize, year: usize) -> Option<f64> {
        self.values[country * self.years.len() + year]
    }

    /// One country's row of observations, indexed like `years()`.
    pub fn row(&self, country: usize) -> &[Option<f64>] {
        let ny = self.years.len();
        &self.values[country * ny..(country + 1) * ny]
    }

    /// Applies a cleaning policy. With `drop_negative` set, negative
    /// observations become missing; otherwise the panel is returned as is.
    /// Idempotent.
    pub fn cleaned(&self, policy: &CleaningPolicy) -> TimeSeriesPanel {
        if !policy.drop_negative {
            return self.clone();
        }
        let values = self
            .values
            .iter()
            .map(|v| v.filter(|x| *x >= 0.0))
            .collect();
        TimeSeriesPanel {
            indicator: self.indicator,
            countries: self.countries.clone(),
            years: self.years.clone(),
            values,
        }
    }

    /// Restricts to the countries listed, in the listed order.
    pub fn select_countries(&self, codes: &[CountryCode]) -> Result<TimeSeriesPanel> {
        let ny = self.years.len();
        let mut countries = Vec::with_capacity(codes.len());
        let mut values = Vec::with_capacity(codes.len() * ny);
        for code in codes {
            let ci = self
                .country_index(*code)
                .ok_or_else(|| Error::UnknownCountry {
                    code: code.to_string(),
                })?;
            countries.push(*code);
            values.extend_from_slice(self.row(ci));
        }
        TimeSeriesPanel::new(self.indicator, countries, self.years.clone(), values)
    }

    /// Restricts to years in the inclusive window `[from, to]`. An empty
    /// window yields a panel with zero year columns.
    pub fn year_window(&self, from: i32, to: i32) -> TimeSeriesPanel {
        let ny = self.years.len();
        let keep: Vec<usize> = (0..ny)
            .filter(|&yi| self.years[yi] >= from && self.years[yi] <= to)
            .collect();
        let years: Vec<i32> = keep.iter().map(|&yi| self.years[yi]).collect();
        let mut values = Vec::with_capacity(self.countries.len() * years.len());
        for ci in 0..self.countries.len() {
            for &yi in &keep {
                values.push(self.values[ci * ny + yi]);
            }
        }
        TimeSeriesPanel {
            indicator: self.indicator,
            countries: self.countries.clone(),
            years,
            values,
        }
    }

    /// Aligns two countries of this panel on their common observed years.
    pub fn align_pair(
        &self,
        a: CountryCode,
        b: CountryCode,
        policy: &CleaningPolicy,
    ) -> Result<AlignedPair> {
        align_across(self, a, self, b, policy)
    }
}

/// Aligns one country's series from each of two panels (possibly the same
/// panel) on the years where both are observed. Fails with
/// [`Error::InsufficientOverlap`] when fewer than `policy.min_overlap()`
/// common observations remain.
pub fn align_across(
    left: &TimeSeriesPanel,
    left_code: CountryCode,
    right: &TimeSeriesPanel,
    right_code: CountryCode,
    policy: &CleaningPolicy,
) -> Result<AlignedPair> {
    let li = left
        .country_index(left_code)
        .ok_or_else(|| Error::UnknownCountry {
            code: left_code.to_string(),
        })?;
    let ri = right
        .country_index(right_code)
        .ok_or_else(|| Error::UnknownCountry {
            code: right_code.to_string(),
        })?;

    let mut years = Vec::new();
    let mut lv = Vec::new();
    let mut rv = Vec::new();
    // Both year axes are strictly increasing; merge with two cursors.
    let (ly, ry) = (left.years(), right.years());
    let (mut i, mut j) = (0, 0);
    while i < ly.len() && j < ry.len() {
        match ly[i].cmp(&ry[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if let (Some(a), Some(b)) = (left.get(li, i), right.get(ri, j)) {
                    years.push(ly[i]);
                    lv.push(a);
                    rv.push(b);
                }
                i += 1;
                j += 1;
            }
        }
    }

    if years.len() < policy.min_overlap() {
        return Err(Error::InsufficientOverlap {
            a: left_code,
            b: right_code,
            overlap: years.len(),
            required: policy.min_overlap(),
        });
    }
    Ok(AlignedPair {
        years,
        left: lv,
        right: rv,
    })
}
