//! Geographic distortions in country and city names.
//!
//! Covers city-name vocabulary coverage, region-relative radius tables, the
//! radius–GDP correlation, templated "artificial" contexts, and counts of
//! countries whose embeddings look alike under a cosine threshold.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::geometry::{cohort_radius, sample_points, RadiusParams};
use crate::point::dot;
use crate::stats::{pearson, PairedSeries};
use crate::{exec, Error, Result, SiblingCohort};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Region {
    NorthAmerica,
    Europe,
    MiddleEast,
    Asia,
    SouthAmerica,
    Oceania,
    /// Includes the Caribbean.
    CentralAmerica,
    Africa,
}

impl Region {
    pub const ALL: [Region; 8] = [
        Region::NorthAmerica,
        Region::Europe,
        Region::MiddleEast,
        Region::Asia,
        Region::SouthAmerica,
        Region::Oceania,
        Region::CentralAmerica,
        Region::Africa,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::NorthAmerica => "North America",
            Region::Europe => "Europe",
            Region::MiddleEast => "Middle East",
            Region::Asia => "Asia",
            Region::SouthAmerica => "South America",
            Region::Oceania => "Oceania",
            Region::CentralAmerica => "Central America",
            Region::Africa => "Africa",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Region::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown region `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountryRecord {
    pub name: String,
    pub region: Region,
    /// USD; positive when present.
    pub gdp: Option<f64>,
    pub token_count: u32,
    /// Why the name is left out of analyses, e.g. polysemy.
    pub excluded: Option<String>,
}

impl CountryRecord {
    pub fn is_single_word(&self) -> bool {
        !self.name.contains(char::is_whitespace)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CityRecord {
    pub name: String,
    pub country: String,
    pub region: Region,
    pub population: u64,
}

/// Cities below this population are ignored by coverage analyses.
pub const MIN_CITY_POPULATION: u64 = 100_000;

/// Country names with frequent unrelated senses. "China" and "Turkey" stay.
pub const DEFAULT_EXCLUDED: [&str; 5] = ["Chad", "Jordan", "Mali", "Georgia", "Guinea"];

/// Slot marker in artificial sentence templates.
pub const COUNTRY_SLOT: &str = "[COUNTRY]";

/// Countries kept for analysis: not flagged in the table, not in
/// `excluded` (case-sensitive), and single-word if requested.
pub fn select_countries<'a>(countries: &'a [CountryRecord], excluded: &[String], single_word_only: bool) -> Vec<&'a CountryRecord> {
    countries
        .iter()
        .filter(|c| c.excluded.is_none() && !excluded.contains(&c.name))
        .filter(|c| !single_word_only || c.is_single_word())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coverage {
    pub cities: usize,
    pub in_vocab: usize,
}

impl Coverage {
    pub fn percent(&self) -> f64 {
        100.0 * self.in_vocab as f64 / self.cities as f64
    }
}

fn coverage_by<K: Ord>(cities: &[CityRecord], vocab: &HashSet<String>, key: impl Fn(&CityRecord) -> K) -> Result<BTreeMap<K, Coverage>> {
    let mut out: BTreeMap<K, Coverage> = BTreeMap::new();
    for city in cities.iter().filter(|c| c.population >= MIN_CITY_POPULATION) {
        let slot = out.entry(key(city)).or_insert(Coverage { cities: 0, in_vocab: 0 });
        slot.cities += 1;
        if vocab.contains(&city.name) {
            slot.in_vocab += 1;
        }
    }
    if out.is_empty() {
        return Err(Error::invalid(format!("no cities with population ≥ {MIN_CITY_POPULATION}")));
    }
    Ok(out)
}

/// Share of cities per region whose name is a whole vocabulary entry.
pub fn vocab_coverage(cities: &[CityRecord], vocab: &HashSet<String>) -> Result<BTreeMap<Region, Coverage>> {
    coverage_by(cities, vocab, |c| c.region)
}

pub fn vocab_coverage_by_country(cities: &[CityRecord], vocab: &HashSet<String>) -> Result<BTreeMap<String, Coverage>> {
    coverage_by(cities, vocab, |c| c.country.clone())
}

/// Mean cohort radius per country for one source.
pub fn country_radii(
    countries: &[&CountryRecord],
    cohorts: &BTreeMap<String, SiblingCohort>,
    params: &RadiusParams,
) -> Result<BTreeMap<String, f64>> {
    let radii = exec::try_map(countries, |c| {
        let cohort = cohorts
            .get(&c.name)
            .ok_or_else(|| Error::Missing(format!("cohort for `{}`", c.name)))?;
        cohort_radius(cohort, params)
    })?;
    Ok(countries.iter().map(|c| c.name.clone()).zip(radii).collect())
}

/// Region × source table of mean radii, each row scaled so North America
/// reads 100.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionRadiusTable {
    pub regions: Vec<Region>,
    pub sources: Vec<String>,
    /// `percent[s][r]` for source `s`, region `r`.
    pub percent: Vec<Vec<f64>>,
    pub mean_radius: Vec<Vec<f64>>,
}

/// `radii` holds one `(source, country → radius)` map per source. Regions
/// without countries are left out; North America must be present.
pub fn region_radius_table(countries: &[&CountryRecord], radii: &[(String, BTreeMap<String, f64>)]) -> Result<RegionRadiusTable> {
    let regions: Vec<Region> = Region::ALL
        .into_iter()
        .filter(|r| countries.iter().any(|c| c.region == *r))
        .collect();
    if regions.first() != Some(&Region::NorthAmerica) {
        return Err(Error::invalid("region North America has no countries"));
    }
    let mut table = RegionRadiusTable {
        regions: regions.clone(),
        sources: Vec::new(),
        percent: Vec::new(),
        mean_radius: Vec::new(),
    };
    for (source, by_country) in radii {
        let means = regions
            .iter()
            .map(|&region| {
                let vals = countries
                    .iter()
                    .filter(|c| c.region == region)
                    .map(|c| {
                        by_country
                            .get(&c.name)
                            .copied()
                            .ok_or_else(|| Error::Missing(format!("{source} radius for `{}`", c.name)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(vals.iter().sum::<f64>() / vals.len() as f64)
            })
            .collect::<Result<Vec<f64>>>()?;
        let base = means[0];
        if base <= 0.0 {
            return Err(Error::invalid(format!("{source}: North America mean radius is zero")));
        }
        table.percent.push(means.iter().map(|m| m / base * 100.0).collect());
        table.mean_radius.push(means);
        table.sources.push(source.clone());
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdpCorrelation {
    pub pearson: f64,
    pub countries: usize,
    pub low_gdp_countries: usize,
    pub low_gdp_mean_radius: f64,
    pub top_gdp_mean_radius: f64,
}

impl GdpCorrelation {
    /// How much smaller the low-GDP balls are, in percent of the top group.
    pub fn gap_percent(&self) -> f64 {
        100.0 * (1.0 - self.low_gdp_mean_radius / self.top_gdp_mean_radius)
    }
}

/// GDP below which a country is in the low group.
pub const LOW_GDP: f64 = 1e10;
/// Size of the top-GDP comparison group.
pub const TOP_GDP_GROUP: usize = 2;

/// Pearson of radius against ln(gdp). Countries without GDP or radius are
/// skipped with a warning.
pub fn gdp_radius_correlation(countries: &[&CountryRecord], radii: &BTreeMap<String, f64>) -> Result<GdpCorrelation> {
    let mut usable: Vec<(f64, f64)> = Vec::new();
    for c in countries {
        match (c.gdp, radii.get(&c.name)) {
            (Some(gdp), Some(&r)) => usable.push((gdp, r)),
            (None, _) => log::warn!("skipping {}: no GDP", c.name),
            (_, None) => log::warn!("skipping {}: no radius", c.name),
        }
    }
    if usable.len() < 10 {
        return Err(Error::invalid(format!(
            "GDP correlation needs at least 10 countries with GDP and radius, got {}",
            usable.len()
        )));
    }
    let series = PairedSeries::new(usable.iter().map(|u| u.1).collect(), usable.iter().map(|u| u.0.ln()).collect())?;
    let r = pearson(&series)?;
    let low: Vec<f64> = usable.iter().filter(|u| u.0 < LOW_GDP).map(|u| u.1).collect();
    let mut by_gdp = usable.clone();
    by_gdp.sort_by(|a, b| b.0.total_cmp(&a.0));
    let top: Vec<f64> = by_gdp.iter().take(TOP_GDP_GROUP).map(|u| u.1).collect();
    let mean = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
    Ok(GdpCorrelation {
        pearson: r,
        countries: usable.len(),
        low_gdp_countries: low.len(),
        low_gdp_mean_radius: mean(&low),
        top_gdp_mean_radius: mean(&top),
    })
}

/// Fills the single [`COUNTRY_SLOT`] in every template with `country`.
pub fn artificial_sentences(templates: &[String], country: &str) -> Result<Vec<String>> {
    templates
        .iter()
        .enumerate()
        .map(|(i, t)| match t.matches(COUNTRY_SLOT).count() {
            1 => Ok(t.replacen(COUNTRY_SLOT, country, 1)),
            n => Err(Error::invalid(format!("template {} has {n} {COUNTRY_SLOT} slots, expected 1", i + 1))),
        })
        .collect()
}

/// How the instance × instance cosines against one other country collapse
/// to a single score before thresholding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    #[default]
    Mean,
    /// Equivalent to "any comparison meets the threshold".
    Max,
}

impl Reduction {
    pub fn as_str(self) -> &'static str {
        match self {
            Reduction::Mean => "mean",
            Reduction::Max => "max",
        }
    }
}

impl fmt::Display for Reduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Reduction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Reduction::Mean),
            "max" | "any" => Ok(Reduction::Max),
            _ => Err(Error::invalid(format!("unknown reduction `{s}` (mean | max | any)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityQuery {
    pub threshold: f64,
    pub instances: usize,
    pub reduction: Reduction,
    pub seed: u64,
}

impl Default for SimilarityQuery {
    fn default() -> Self {
        SimilarityQuery {
            threshold: 0.7,
            instances: 10,
            reduction: Reduction::Mean,
            seed: 0,
        }
    }
}

fn unit_samples(cohort: &SiblingCohort, query: &SimilarityQuery) -> Result<Vec<Vec<f64>>> {
    sample_points(cohort, query.instances, query.seed, 0)?
        .into_iter()
        .map(|p| {
            let n = p.norm();
            if n == 0.0 {
                Err(Error::invalid(format!("zero embedding for `{}`", cohort.word())))
            } else {
                Ok(p.coords().iter().map(|x| x / n).collect())
            }
        })
        .collect()
}

fn count_for(target: usize, samples: &[Vec<Vec<f64>>], query: &SimilarityQuery) -> f64 {
    let mine = &samples[target];
    let total: usize = mine
        .iter()
        .map(|u| {
            samples
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != target)
                .filter(|(_, other)| {
                    let cosines = other.iter().map(|v| dot(u, v));
                    let score = match query.reduction {
                        Reduction::Mean => cosines.sum::<f64>() / other.len() as f64,
                        Reduction::Max => cosines.fold(f64::NEG_INFINITY, f64::max),
                    };
                    score >= query.threshold
                })
                .count()
        })
        .sum();
    total as f64 / mine.len() as f64
}

/// Mean number of other countries judged similar to `target`, averaged over
/// the target's sampled instances.
pub fn similar_country_count(target: &str, cohorts: &BTreeMap<String, SiblingCohort>, query: &SimilarityQuery) -> Result<f64> {
    let names: Vec<&String> = cohorts.keys().collect();
    let index = names
        .iter()
        .position(|n| *n == target)
        .ok_or_else(|| Error::Missing(format!("cohort for `{target}`")))?;
    let samples = exec::try_map(&names, |n| unit_samples(&cohorts[*n], query))?;
    Ok(count_for(index, &samples, query))
}

/// [`similar_country_count`] for every country at once.
pub fn similar_country_counts(cohorts: &BTreeMap<String, SiblingCohort>, query: &SimilarityQuery) -> Result<BTreeMap<String, f64>> {
    let names: Vec<&String> = cohorts.keys().collect();
    let samples = exec::try_map(&names, |n| unit_samples(&cohorts[*n], query))?;
    let counts = exec::map_range(names.len(), |i| count_for(i, &samples, query));
    Ok(names.into_iter().cloned().zip(counts).collect())
}

/// Mean of `values` per region over `countries`; regions without values
/// are omitted.
pub fn region_means(countries: &[&CountryRecord], values: &BTreeMap<String, f64>) -> BTreeMap<Region, f64> {
    let mut acc: BTreeMap<Region, (f64, usize)> = BTreeMap::new();
    for c in countries {
        if let Some(v) = values.get(&c.name) {
            let slot = acc.entry(c.region).or_insert((0.0, 0));
            slot.0 += v;
            slot.1 += 1;
        }
    }
    acc.into_iter().map(|(r, (s, n))| (r, s / n as f64)).collect()
}
