//! Recordings, electrodes, bipolar channels and named set-ups.
//!
//! A [`Recording`] holds monopolar electrode potentials. Model inputs are
//! always bipolar [`Channel`]s derived from two electrodes, grouped into a
//! [`SetUp`] (montage).

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 256.0;

/// The six electrodes of the headset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ElectrodeName {
    T7,
    Cz,
    Oz,
    Fp1,
    Fp2,
    Ref,
}

impl ElectrodeName {
    pub const ALL: [ElectrodeName; 6] = [
        ElectrodeName::T7,
        ElectrodeName::Cz,
        ElectrodeName::Oz,
        ElectrodeName::Fp1,
        ElectrodeName::Fp2,
        ElectrodeName::Ref,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ElectrodeName::T7 => "T7",
            ElectrodeName::Cz => "Cz",
            ElectrodeName::Oz => "Oz",
            ElectrodeName::Fp1 => "Fp1",
            ElectrodeName::Fp2 => "Fp2",
            ElectrodeName::Ref => "Ref",
        }
    }

    /// Lower-case form used inside channel names ("refT7").
    fn channel_token(self) -> &'static str {
        match self {
            ElectrodeName::Ref => "ref",
            other => other.as_str(),
        }
    }
}

impl fmt::Display for ElectrodeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ElectrodeName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ElectrodeName::ALL
            .into_iter()
            .find(|e| e.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown electrode {s:?}")))
    }
}

/// Sample label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Alpha,
    NonAlpha,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Alpha => "alpha",
            Label::NonAlpha => "nonalpha",
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::Alpha => Label::NonAlpha,
            Label::NonAlpha => Label::Alpha,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "alpha" => Ok(Label::Alpha),
            "nonalpha" | "non-alpha" => Ok(Label::NonAlpha),
            other => Err(Error::Parse(format!("unknown label {other:?}"))),
        }
    }
}

/// Labeled multi-electrode recording. Rows of `samples` follow `electrodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub id: String,
    pub sample_rate_hz: f64,
    pub electrodes: Vec<ElectrodeName>,
    pub samples: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
}

impl Recording {
    /// Builds a recording, checking every invariant.
    pub fn new(
        id: impl Into<String>,
        sample_rate_hz: f64,
        electrodes: Vec<ElectrodeName>,
        samples: Vec<Vec<f64>>,
        labels: Vec<Label>,
    ) -> Result<Self> {
        let rec = Recording {
            id: id.into(),
            sample_rate_hz,
            electrodes,
            samples,
            labels,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::invariant(format!(
                "sample rate must be positive, got {}",
                self.sample_rate_hz
            )));
        }
        if self.electrodes.is_empty() {
            return Err(Error::invariant("recording has no electrodes"));
        }
        for (i, e) in self.electrodes.iter().enumerate() {
            if self.electrodes[..i].contains(e) {
                return Err(Error::invariant(format!("electrode {e} listed twice")));
            }
        }
        if self.samples.len() != self.electrodes.len() {
            return Err(Error::invariant(format!(
                "{} sample rows for {} electrodes",
                self.samples.len(),
                self.electrodes.len()
            )));
        }
        let n = self.labels.len();
        if n == 0 {
            return Err(Error::invariant("recording has no samples"));
        }
        for (e, row) in self.electrodes.iter().zip(&self.samples) {
            if row.len() != n {
                return Err(Error::invariant(format!(
                    "electrode {e} has {} samples but there are {n} labels",
                    row.len()
                )));
            }
            if let Some(i) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::invariant(format!(
                    "non-finite value at sample {i} of electrode {e}"
                )));
            }
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn electrode(&self, name: ElectrodeName) -> Result<&[f64]> {
        self.electrodes
            .iter()
            .position(|&e| e == name)
            .map(|i| self.samples[i].as_slice())
            .ok_or_else(|| Error::MissingElectrode(name.to_string()))
    }

    pub fn duration_s(&self) -> f64 {
        self.n_samples() as f64 / self.sample_rate_hz
    }
}

/// Bipolar channel: potential of `positive` minus potential of `negative`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Channel {
    pub positive: ElectrodeName,
    pub negative: ElectrodeName,
}

impl Channel {
    pub fn new(positive: ElectrodeName, negative: ElectrodeName) -> Result<Self> {
        if positive == negative {
            return Err(Error::invariant(format!(
                "channel needs two distinct electrodes, got {positive} twice"
            )));
        }
        Ok(Channel { positive, negative })
    }

    pub fn swapped(self) -> Channel {
        Channel {
            positive: self.negative,
            negative: self.positive,
        }
    }

    pub fn uses(self, e: ElectrodeName) -> bool {
        self.positive == e || self.negative == e
    }

    /// Name in the concatenated style, e.g. `CzOz` or `refT7`.
    pub fn name(self) -> String {
        format!(
            "{}{}",
            self.positive.channel_token(),
            self.negative.channel_token()
        )
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Channel {
    type Err = Error;

    /// Parses concatenated names such as `CzOz`, `Fp1Fp2` or `refT7`.
    fn from_str(s: &str) -> Result<Self> {
        for first in ElectrodeName::ALL {
            let tok = first.channel_token();
            if s.len() > tok.len() && s[..tok.len()].eq_ignore_ascii_case(tok) {
                if let Ok(second) = s[tok.len()..].parse::<ElectrodeName>() {
                    return Channel::new(first, second);
                }
            }
        }
        Err(Error::Parse(format!("cannot parse channel name {s:?}")))
    }
}

/// Returns `samples[positive] − samples[negative]`.
pub fn derive_channel_signal(rec: &Recording, ch: Channel) -> Result<Vec<f64>> {
    let pos = rec.electrode(ch.positive)?;
    let neg = rec.electrode(ch.negative)?;
    Ok(pos.iter().zip(neg).map(|(a, b)| a - b).collect())
}

/// A named montage of one or more distinct channels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetUp {
    pub name: String,
    pub channels: Vec<Channel>,
}

impl SetUp {
    pub fn new(name: impl Into<String>, channels: Vec<Channel>) -> Result<Self> {
        let name = name.into();
        if channels.is_empty() {
            return Err(Error::invariant(format!("set-up {name} has no channels")));
        }
        for (i, c) in channels.iter().enumerate() {
            if c.positive == c.negative {
                return Err(Error::invariant(format!("degenerate channel in {name}")));
            }
            if channels[..i].contains(c) {
                return Err(Error::invariant(format!("channel {c} repeated in {name}")));
            }
        }
        Ok(SetUp { name, channels })
    }

    /// Number of channels, `m`.
    pub fn m(&self) -> usize {
        self.channels.len()
    }

    pub fn uses(&self, e: ElectrodeName) -> bool {
        self.channels.iter().any(|c| c.uses(e))
    }

    pub fn electrodes(&self) -> Vec<ElectrodeName> {
        let mut out: Vec<ElectrodeName> = Vec::new();
        for c in &self.channels {
            for e in [c.positive, c.negative] {
                if !out.contains(&e) {
                    out.push(e);
                }
            }
        }
        out
    }
}

/// Name of the reference set-up every sweep is compared against.
pub const REFERENCE_SETUP: &str = "CzOz";

/// The reference plus the five candidate montages.
pub fn builtin_setups() -> Vec<SetUp> {
    use ElectrodeName::*;
    let ch = |p, n| Channel { positive: p, negative: n };
    let table: [(&str, Vec<Channel>); 6] = [
        (REFERENCE_SETUP, vec![ch(Cz, Oz)]),
        (
            "all",
            vec![
                ch(T7, Cz),
                ch(Fp1, Fp2),
                ch(Ref, Cz),
                ch(Ref, T7),
                ch(Ref, Oz),
                ch(Ref, Fp1),
            ],
        ),
        ("noCz", vec![ch(Fp1, Fp2), ch(Ref, T7), ch(Ref, Oz)]),
        ("wearable", vec![ch(Fp1, Fp2), ch(Ref, T7)]),
        ("refT7", vec![ch(Ref, T7)]),
        ("Fp1Fp2", vec![ch(Fp1, Fp2)]),
    ];
    table
        .into_iter()
        .map(|(name, channels)| SetUp {
            name: name.to_string(),
            channels,
        })
        .collect()
}

/// Looks up a built-in set-up by name (case-sensitive).
pub fn builtin_setup(name: &str) -> Result<SetUp> {
    builtin_setups()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownSetUp(name.to_string()))
}

const RATE_PREFIX: &str = "# sample_rate_hz=";

/// Reads a recording from the CSV interchange format.
pub fn load_recording(path: &Path) -> Result<Recording> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);

    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| Error::io(path, e))?;
    let rate_str = first
        .trim_end_matches(['\n', '\r'])
        .strip_prefix(RATE_PREFIX)
        .ok_or_else(|| Error::Parse(format!("{}: line 1: expected `{RATE_PREFIX}<hz>`", path.display())))?;
    let sample_rate_hz: f64 = rate_str
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{}: line 1: bad sample rate {rate_str:?}", path.display())))?;

    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = csv
        .headers()
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        .clone();
    let cols: Vec<&str> = header.iter().collect();
    if cols.len() < 3 || cols[0] != "t" || cols[cols.len() - 1] != "label" {
        return Err(Error::Parse(format!(
            "{}: line 2: header must be `t,<electrodes...>,label`",
            path.display()
        )));
    }
    let electrodes = cols[1..cols.len() - 1]
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<ElectrodeName>>>()?;
    let n_e = electrodes.len();

    let mut samples = vec![Vec::new(); n_e];
    let mut labels = Vec::new();
    for (row_idx, row) in csv.records().enumerate() {
        let line = row_idx + 3;
        let row = row.map_err(|e| Error::Parse(format!("{}: line {line}: {e}", path.display())))?;
        // A row may omit its label; that shows up as a length mismatch.
        if row.len() != n_e + 2 && row.len() != n_e + 1 {
            return Err(Error::Parse(format!(
                "{}: line {line}: expected {} fields, found {}",
                path.display(),
                n_e + 2,
                row.len()
            )));
        }
        row[0]
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::Parse(format!("{}: line {line}: bad sample index", path.display())))?;
        for (j, dst) in samples.iter_mut().enumerate() {
            let field = row[j + 1].trim();
            let v: f64 = field.parse().map_err(|_| {
                Error::Parse(format!("{}: line {line}: bad value {field:?}", path.display()))
            })?;
            dst.push(v);
        }
        if let Some(l) = row.get(n_e + 1) {
            if !l.trim().is_empty() {
                labels.push(l.parse()?);
            }
        }
    }

    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Recording::new(id, sample_rate_hz, electrodes, samples, labels)
}

/// Writes a recording in the CSV interchange format at full precision.
pub fn save_recording(rec: &Recording, path: &Path) -> Result<()> {
    rec.validate()?;
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{RATE_PREFIX}{}", rec.sample_rate_hz).map_err(io)?;
    write!(w, "t").map_err(io)?;
    for e in &rec.electrodes {
        write!(w, ",{e}").map_err(io)?;
    }
    writeln!(w, ",label").map_err(io)?;
    for (i, label) in rec.labels.iter().enumerate() {
        write!(w, "{i}").map_err(io)?;
        for row in &rec.samples {
            // `Display` for f64 prints the shortest string that round-trips.
            write!(w, ",{}", row[i]).map_err(io)?;
        }
        writeln!(w, ",{label}").map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ElectrodeName::*;

    fn two_electrode(cz: Vec<f64>, oz: Vec<f64>) -> Recording {
        let n = cz.len();
        Recording::new("t", 256.0, vec![Cz, Oz], vec![cz, oz], vec![Label::Alpha; n]).unwrap()
    }

    #[test]
    fn constant_difference() {
        let rec = two_electrode(vec![5.0; 8], vec![2.0; 8]);
        let sig = derive_channel_signal(&rec, Channel::new(Cz, Oz).unwrap()).unwrap();
        assert_eq!(sig, vec![3.0; 8]);
    }

    #[test]
    fn zero_subtrahend_passes_signal_through() {
        let cz: Vec<f64> = (0..256)
            .map(|i| (2.0 * std::f64::consts::PI * 10.0 * i as f64 / 256.0).sin())
            .collect();
        let rec = two_electrode(cz.clone(), vec![0.0; 256]);
        let sig = derive_channel_signal(&rec, Channel::new(Cz, Oz).unwrap()).unwrap();
        assert_eq!(sig, cz);
    }

    #[test]
    fn missing_electrode() {
        let rec = two_electrode(vec![1.0], vec![1.0]);
        let err = derive_channel_signal(&rec, Channel::new(Ref, T7).unwrap()).unwrap_err();
        assert!(matches!(err, Error::MissingElectrode(_)));
    }

    #[test]
    fn degenerate_channel_rejected() {
        assert!(Channel::new(Cz, Cz).is_err());
        let bad = Channel { positive: Oz, negative: Oz };
        assert!(SetUp::new("x", vec![bad]).is_err());
        assert!(SetUp::new("x", vec![]).is_err());
        let c = Channel::new(Cz, Oz).unwrap();
        assert!(SetUp::new("x", vec![c, c]).is_err());
    }

    #[test]
    fn builtin_lookup() {
        let all = builtin_setups();
        assert_eq!(all.len(), 6);
        let wearable = builtin_setup("wearable").unwrap();
        assert_eq!(wearable.m(), 2);
        assert_eq!(
            wearable.channels,
            vec![Channel::new(Fp1, Fp2).unwrap(), Channel::new(Ref, T7).unwrap()]
        );
        let no_cz = builtin_setup("noCz").unwrap();
        let names: Vec<String> = no_cz.channels.iter().map(|c| c.name()).collect();
        assert_eq!(names, ["Fp1Fp2", "refT7", "refOz"]);
        let reference = builtin_setup("CzOz").unwrap();
        assert_eq!(reference.channels, vec![Channel::new(Cz, Oz).unwrap()]);
        assert_eq!(builtin_setup("all").unwrap().m(), 6);
        assert!(builtin_setup("nope").is_err());
    }

    #[test]
    fn only_reference_and_all_touch_cz() {
        for s in builtin_setups() {
            SetUp::new(s.name.clone(), s.channels.clone()).unwrap();
            let expect_cz = s.name == "CzOz" || s.name == "all";
            assert_eq!(s.uses(Cz), expect_cz, "{}", s.name);
        }
    }

    #[test]
    fn channel_names_round_trip() {
        for s in builtin_setups() {
            for c in &s.channels {
                assert_eq!(c.name().parse::<Channel>().unwrap(), *c);
            }
        }
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rec.csv");
        let rec = Recording::new(
            "rec",
            256.0,
            vec![Cz, Oz, Ref],
            vec![
                vec![0.1, -1e-300, 12345.678901234567],
                vec![1.0 / 3.0, 2.0, f64::MIN_POSITIVE],
                vec![-0.0, 7.5, 1e10],
            ],
            vec![Label::Alpha, Label::NonAlpha, Label::Alpha],
        )
        .unwrap();
        save_recording(&rec, &path).unwrap();
        let back = load_recording(&path).unwrap();
        assert_eq!(back.n_samples(), 3);
        assert_eq!(back, rec);
    }

    #[test]
    fn label_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(
            &path,
            "# sample_rate_hz=256\nt,Cz,Oz,label\n0,1,2,alpha\n1,1,2,alpha\n2,1,2\n",
        )
        .unwrap();
        assert!(matches!(
            load_recording(&path).unwrap_err(),
            Error::InvariantViolation(_)
        ));
    }

    #[test]
    fn nan_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nan.csv");
        fs::write(&path, "# sample_rate_hz=256\nt,Cz,label\n0,NaN,alpha\n").unwrap();
        assert!(matches!(
            load_recording(&path).unwrap_err(),
            Error::InvariantViolation(_)
        ));
    }

    #[test]
    fn malformed_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        fs::write(&path, "t,Cz,label\n0,1,alpha\n").unwrap();
        assert!(matches!(load_recording(&path).unwrap_err(), Error::Parse(_)));
        fs::write(&path, "# sample_rate_hz=256\nt,Xx,label\n0,1,alpha\n").unwrap();
        assert!(matches!(load_recording(&path).unwrap_err(), Error::Parse(_)));
    }

    #[test]
    fn unwritable_path() {
        let rec = two_electrode(vec![1.0], vec![2.0]);
        let err = save_recording(&rec, Path::new("/nonexistent-dir/x/rec.csv")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn empty_recording_rejected_before_save() {
        let rec = Recording {
            id: "e".into(),
            sample_rate_hz: 256.0,
            electrodes: vec![],
            samples: vec![],
            labels: vec![Label::Alpha],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        assert!(matches!(
            save_recording(&rec, &path).unwrap_err(),
            Error::InvariantViolation(_)
        ));
        assert!(!path.exists());
    }
}
