//! Dataset loading, model persistence and report emission. Every writer goes
//! through a temporary file in the destination directory and is renamed into
//! place only after the content is complete.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{CellOutcome, Direction, ExperimentReport, LabeledDataset};
use crate::linalg::{EigenOrder, Matrix};
use crate::reducers::{Fitted, KernelModel, KernelSpec, Method, ReductionModel};
use crate::robust::{HuberParams, ScalingModel};

pub const MODEL_FORMAT_VERSION: u32 = 1;
/// Orthonormality tolerance applied when loading a model.
pub const LOAD_ORTHONORMALITY_TOLERANCE: f64 = 1e-6;

const MISSING: [&str; 3] = ["", "?", "NA"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Keyword {
    Last,
    Auto,
}

/// Which column holds the class label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Keyword(Keyword),
}

impl Default for LabelColumn {
    fn default() -> Self {
        LabelColumn::Keyword(Keyword::Last)
    }
}

impl std::str::FromStr for LabelColumn {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("last") {
            return Ok(LabelColumn::Keyword(Keyword::Last));
        }
        s.parse()
            .map(LabelColumn::Index)
            .map_err(|_| format!("expected a column index or \"last\", got {s:?}"))
    }
}

/// Which feature columns are categorical. `auto` marks every column with a
/// cell that does not parse as a number.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Categorical {
    Columns(Vec<usize>),
    Keyword(Keyword),
}

impl Default for Categorical {
    fn default() -> Self {
        Categorical::Keyword(Keyword::Auto)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    /// One column of integer codes in first-appearance order.
    #[default]
    Ordinal,
    /// One 0/1 column per category, in first-appearance order.
    OneHot,
}

fn default_true() -> bool {
    true
}

fn default_delimiter() -> char {
    ','
}

/// How to read one CSV file as a labelled dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    #[serde(default)]
    pub name: String,
    pub path: PathBuf,
    #[serde(default = "default_true")]
    pub has_header: bool,
    #[serde(default)]
    pub label_column: LabelColumn,
    /// Column indices refer to the file, label column included.
    #[serde(default)]
    pub categorical: Categorical,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default)]
    pub encoding: Encoding,
}

impl DatasetManifest {
    pub fn for_file(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        DatasetManifest {
            name,
            path,
            has_header: true,
            label_column: LabelColumn::default(),
            categorical: Categorical::default(),
            delimiter: ',',
            encoding: Encoding::default(),
        }
    }

    /// Reads a TOML manifest. A relative `path` is resolved against the
    /// manifest's directory; an empty `name` becomes the file stem.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m: DatasetManifest = toml::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        if m.path.is_relative() {
            if let Some(dir) = path.parent() {
                m.path = dir.join(&m.path);
            }
        }
        if m.name.is_empty() {
            m.name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        Ok(m)
    }
}

fn parse_error(path: &Path, line: u64, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        col,
        msg: msg.into(),
    }
}

/// First-appearance code book.
#[derive(Default)]
struct Codes {
    names: Vec<String>,
}

impl Codes {
    fn code(&mut self, s: &str) -> usize {
        match self.names.iter().position(|n| n == s) {
            Some(i) => i,
            None => {
                self.names.push(s.to_string());
                self.names.len() - 1
            }
        }
    }
}

/// Loads a CSV file as a [`LabeledDataset`]. Numeric feature columns parse as
/// reals, categorical ones are encoded in first-appearance order, and labels
/// map to class ids in first-appearance order. Missing cells (`""`, `?`,
/// `NA`) are an error; nothing is imputed. Line and column numbers in errors
/// are 1-based.
pub fn load_csv(manifest: &DatasetManifest) -> Result<LabeledDataset> {
    let path = manifest.path.as_path();
    if !manifest.delimiter.is_ascii() {
        return Err(Error::param("delimiter must be a single ASCII character"));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(manifest.has_header)
        .delimiter(manifest.delimiter as u8)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Format {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
    let mut records: Vec<(u64, Vec<String>)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, 0, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        records.push((line, rec.iter().map(str::to_string).collect()));
    }
    if records.is_empty() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            msg: "no data rows".into(),
        });
    }
    let width = records[0].1.len();
    if width < 2 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            msg: format!("need a label and at least one feature column, found {width} column(s)"),
        });
    }
    let label_col = match manifest.label_column {
        LabelColumn::Keyword(_) => width - 1,
        LabelColumn::Index(i) if i < width => i,
        LabelColumn::Index(i) => {
            return Err(Error::Format {
                path: path.to_path_buf(),
                msg: format!("label column {i} out of range for {width} columns"),
            })
        }
    };
    for (line, rec) in &records {
        for (j, cell) in rec.iter().enumerate() {
            if MISSING.contains(&cell.as_str()) {
                return Err(parse_error(
                    path,
                    *line,
                    j + 1,
                    format!("missing value {cell:?}"),
                ));
            }
        }
    }
    let feature_cols: Vec<usize> = (0..width).filter(|&j| j != label_col).collect();
    let categorical: Vec<bool> = match &manifest.categorical {
        Categorical::Keyword(_) => (0..width)
            .map(|j| records.iter().any(|(_, r)| r[j].parse::<f64>().is_err()))
            .collect(),
        Categorical::Columns(cols) => {
            if let Some(&bad) = cols.iter().find(|&&c| c >= width) {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    msg: format!("categorical column {bad} out of range for {width} columns"),
                });
            }
            (0..width).map(|j| cols.contains(&j)).collect()
        }
    };

    let mut books: Vec<Codes> = (0..width).map(|_| Codes::default()).collect();
    let mut coded: Vec<Vec<f64>> = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for (line, rec) in &records {
        let mut row = Vec::with_capacity(feature_cols.len());
        for &j in &feature_cols {
            let cell = &rec[j];
            if categorical[j] {
                row.push(books[j].code(cell) as f64);
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    parse_error(path, *line, j + 1, format!("not a number: {cell:?}"))
                })?;
                if !v.is_finite() {
                    return Err(parse_error(
                        path,
                        *line,
                        j + 1,
                        format!("non-finite value {cell:?}"),
                    ));
                }
                row.push(v);
            }
        }
        coded.push(row);
        labels.push(books[label_col].code(&rec[label_col]));
    }
    let class_names = std::mem::take(&mut books[label_col].names);

    let rows: Vec<Vec<f64>> = match manifest.encoding {
        Encoding::Ordinal => coded,
        Encoding::OneHot => coded
            .into_iter()
            .map(|row| {
                let mut out = Vec::new();
                for (v, &j) in row.into_iter().zip(&feature_cols) {
                    if categorical[j] {
                        let levels = books[j].names.len();
                        out.extend((0..levels).map(|c| if c == v as usize { 1.0 } else { 0.0 }));
                    } else {
                        out.push(v);
                    }
                }
                out
            })
            .collect(),
    };
    log::info!(
        "{}: {} rows, {} feature columns, {} classes",
        path.display(),
        rows.len(),
        rows[0].len(),
        class_names.len()
    );
    let features = Matrix::from_rows(&rows)?;
    LabeledDataset::new(manifest.name.clone(), features, labels, class_names)
}

/// Writes `content` to `path` through a temporary file in the same directory,
/// then renames it into place.
pub fn write_atomic(path: &Path, content: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(content)
        .map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn csv_bytes<F>(f: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    f(&mut w).map_err(|e| Error::param(e.to_string()))?;
    w.into_inner().map_err(|e| Error::param(e.to_string()))
}

/// Writes features followed by the label text in the last column, with a
/// header `f0,...,label`. Numbers use the shortest exact representation.
pub fn write_csv(ds: &LabeledDataset, path: &Path) -> Result<()> {
    let bytes = csv_bytes(|w| {
        let mut header: Vec<String> = (0..ds.features.cols()).map(|j| format!("f{j}")).collect();
        header.push("label".into());
        w.write_record(&header)?;
        for (row, &l) in ds.features.row_iter().zip(&ds.labels) {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(ds.class_names[l].clone());
            w.write_record(&rec)?;
        }
        Ok(())
    })?;
    write_atomic(path, &bytes)
}

/// Writes a bare matrix with header `{prefix}0,{prefix}1,...`.
pub fn write_matrix_csv(m: &Matrix, prefix: &str, path: &Path) -> Result<()> {
    let bytes = csv_bytes(|w| {
        w.write_record((0..m.cols()).map(|j| format!("{prefix}{j}")))?;
        for row in m.row_iter() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        Ok(())
    })?;
    write_atomic(path, &bytes)
}

/// Reads an all-numeric CSV with an optional header into a matrix.
pub fn read_matrix_csv(path: &Path, has_header: bool) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Format {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            parse_error(path, e.position().map_or(0, |p| p.line()), 0, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                if MISSING.contains(&cell) {
                    return Err(parse_error(
                        path,
                        line,
                        j + 1,
                        format!("missing value {cell:?}"),
                    ));
                }
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        parse_error(path, line, j + 1, format!("not a finite number: {cell:?}"))
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            msg: "no data rows".into(),
        });
    }
    Matrix::from_rows(&rows)
}

fn tsv_with_header(header: &str, rows: impl Iterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

/// Plot data: `method\tx\ty\tangle_deg`, six decimals.
pub fn plot_tsv(dirs: &[Direction]) -> String {
    tsv_with_header(
        "method\tx\ty\tangle_deg",
        dirs.iter()
            .map(|d| format!("{}\t{:.6}\t{:.6}\t{:.6}", d.method, d.x, d.y, d.angle_deg)),
    )
}

pub fn emit_plot_tsv(dirs: &[Direction], path: &Path) -> Result<()> {
    if dirs.is_empty() {
        return Err(Error::Empty("no directions to emit"));
    }
    write_atomic(path, plot_tsv(dirs).as_bytes())
}

pub fn report_tsv(cells: &[CellOutcome]) -> String {
    tsv_with_header(
        ExperimentReport::TSV_HEADER,
        cells.iter().map(CellOutcome::tsv_row),
    )
}

pub fn emit_report_tsv(cells: &[CellOutcome], path: &Path) -> Result<()> {
    if cells.is_empty() {
        return Err(Error::Empty("no reports to emit"));
    }
    write_atomic(path, report_tsv(cells).as_bytes())
}

#[derive(Serialize, Deserialize)]
struct LinearDoc {
    method: Method,
    input_dim: usize,
    output_dim: usize,
    basis_columns: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    scaling: ScalingModel,
    huber: Option<HuberParams>,
    eigen_order: EigenOrder,
}

#[derive(Serialize, Deserialize)]
struct KernelDoc {
    kernel: KernelSpec,
    train_rows: Vec<Vec<f64>>,
    alpha_rows: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    row_means: Vec<f64>,
    grand_mean: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum ModelDoc {
    Linear(LinearDoc),
    Kernel(KernelDoc),
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    model: ModelDoc,
}

fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(<[f64]>::to_vec).collect()
}

/// Serialises a model as JSON. Floats are written in their shortest exact
/// decimal form, so loading reproduces every value bit for bit.
pub fn model_to_json(model: &Fitted) -> Result<String> {
    let doc = match model {
        Fitted::Linear(m) => ModelDoc::Linear(LinearDoc {
            method: m.method,
            input_dim: m.input_dim(),
            output_dim: m.output_dim(),
            basis_columns: (0..m.output_dim()).map(|j| m.basis.column(j)).collect(),
            eigenvalues: m.eigenvalues.clone(),
            scaling: m.scaling.clone(),
            huber: m.huber,
            eigen_order: m.eigen_order,
        }),
        Fitted::Kernel(m) => ModelDoc::Kernel(KernelDoc {
            kernel: m.kernel,
            train_rows: rows_of(&m.train),
            alpha_rows: rows_of(&m.alphas),
            eigenvalues: m.eigenvalues.clone(),
            row_means: m.row_means.clone(),
            grand_mean: m.grand_mean,
        }),
    };
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        model: doc,
    };
    let mut s = serde_json::to_string_pretty(&file).map_err(|e| Error::param(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn model_from_json(text: &str, path: &Path) -> Result<Fitted> {
    let format = |msg: String| Error::Format {
        path: path.to_path_buf(),
        msg,
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| format(e.to_string()))?;
    let version = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| format("missing format_version".into()))?;
    if version != MODEL_FORMAT_VERSION as u64 {
        return Err(Error::Version {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            expected: MODEL_FORMAT_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| format(e.to_string()))?;
    match file.model {
        ModelDoc::Linear(doc) => {
            if doc.basis_columns.len() != doc.output_dim
                || doc.basis_columns.iter().any(|c| c.len() != doc.input_dim)
            {
                return Err(format(format!(
                    "basis does not match declared shape {}x{}",
                    doc.input_dim, doc.output_dim
                )));
            }
            let model = ReductionModel {
                method: doc.method,
                basis: Matrix::from_columns(&doc.basis_columns)?,
                eigenvalues: doc.eigenvalues,
                scaling: doc.scaling,
                huber: doc.huber,
                eigen_order: doc.eigen_order,
            };
            model
                .validate(LOAD_ORTHONORMALITY_TOLERANCE)
                .map_err(|e| format(e.to_string()))?;
            Ok(Fitted::Linear(model))
        }
        ModelDoc::Kernel(doc) => {
            let train = Matrix::from_rows(&doc.train_rows)?;
            let alphas = Matrix::from_rows(&doc.alpha_rows)?;
            let n = train.rows();
            let d = alphas.cols();
            if alphas.rows() != n
                || doc.row_means.len() != n
                || doc.eigenvalues.len() != d
                || d >= n
            {
                return Err(format(
                    "kernel model arrays have inconsistent shapes".into(),
                ));
            }
            if doc.eigenvalues.iter().any(|&l| !(l.is_finite() && l > 0.0))
                || !doc.grand_mean.is_finite()
            {
                return Err(format(
                    "kernel eigenvalues must be positive and finite".into(),
                ));
            }
            Ok(Fitted::Kernel(KernelModel {
                kernel: doc.kernel,
                train,
                alphas,
                eigenvalues: doc.eigenvalues,
                row_means: doc.row_means,
                grand_mean: doc.grand_mean,
            }))
        }
    }
}

pub fn save_model(model: &Fitted, path: &Path) -> Result<()> {
    write_atomic(path, model_to_json(model)?.as_bytes())
}

pub fn load_model(path: &Path) -> Result<Fitted> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reducers::{dc_hpca_fit, kpca_fit, HuberOptions, RobustScale};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tmp_file(dir: &tempfile::TempDir, name: &str, content: &str) -> PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, content).unwrap();
        p
    }

    #[test]
    fn numeric_csv_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = tmp_file(&dir, "a.csv", "x,y,class\n1.5,2,a\n3,4,b\n-1,0.25,a\n");
        let ds = load_csv(&DatasetManifest::for_file(&p)).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.features.as_slice(), &[1.5, 2.0, 3.0, 4.0, -1.0, 0.25]);
        assert_eq!(ds.labels, vec![0, 1, 0]);
        assert_eq!(ds.class_names, vec!["a", "b"]);
        assert_eq!(ds.name, "a");
    }

    #[test]
    fn categorical_first_appearance_codes() {
        let dir = tempfile::tempdir().unwrap();
        let p = tmp_file(
            &dir,
            "t.csv",
            "c1,c2,class\nx,1,pos\no,2,neg\nb,3,pos\nx,4,neg\n",
        );
        let ds = load_csv(&DatasetManifest::for_file(&p)).unwrap();
        assert_eq!(ds.features.column(0), vec![0.0, 1.0, 2.0, 0.0]);
        assert_eq!(ds.features.column(1), vec![1.0, 2.0, 3.0, 4.0]);

        let m = DatasetManifest {
            encoding: Encoding::OneHot,
            ..DatasetManifest::for_file(&p)
        };
        let oh = load_csv(&m).unwrap();
        assert_eq!(oh.features.cols(), 4);
        assert_eq!(oh.features.row(1), &[0.0, 1.0, 0.0, 2.0]);

        let m = DatasetManifest {
            categorical: Categorical::Columns(vec![1]),
            ..DatasetManifest::for_file(&p)
        };
        let err = load_csv(&m).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Parse {
                    line: 2,
                    col: 1,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn missing_value_names_position() {
        let dir = tempfile::tempdir().unwrap();
        let p = tmp_file(&dir, "m.csv", "a,b,c\n1,2,x\n3,?,y\n");
        let err = load_csv(&DatasetManifest::for_file(&p)).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Parse {
                    line: 3,
                    col: 2,
                    ..
                }
            ),
            "{err}"
        );
        assert!(err.to_string().contains("line 3, column 2"));
    }

    #[test]
    fn loader_errors() {
        let dir = tempfile::tempdir().unwrap();
        let missing = DatasetManifest::for_file(dir.path().join("nope.csv"));
        assert!(load_csv(&missing).is_err());
        let empty = tmp_file(&dir, "e.csv", "a,b\n");
        assert!(load_csv(&DatasetManifest::for_file(&empty)).is_err());
        let one_class = tmp_file(&dir, "o.csv", "a,b\n1,x\n2,x\n");
        assert!(load_csv(&DatasetManifest::for_file(&one_class)).is_err());
        let p = tmp_file(&dir, "l.csv", "1,2,a\n3,4,b\n");
        let m = DatasetManifest {
            label_column: LabelColumn::Index(3),
            has_header: false,
            ..DatasetManifest::for_file(&p)
        };
        assert!(load_csv(&m).is_err());
        let m = DatasetManifest {
            label_column: LabelColumn::Index(2),
            has_header: false,
            ..DatasetManifest::for_file(&p)
        };
        assert_eq!(load_csv(&m).unwrap().len(), 2);
    }

    #[test]
    fn manifest_parsing() {
        let dir = tempfile::tempdir().unwrap();
        tmp_file(&dir, "d.csv", "l,a\np,1\nq,2\n");
        let mp = tmp_file(
            &dir,
            "d.toml",
            "path = \"d.csv\"\nlabel_column = 0\ncategorical = []\n",
        );
        let m = DatasetManifest::load(&mp).unwrap();
        assert_eq!(m.label_column, LabelColumn::Index(0));
        assert_eq!(m.name, "d");
        assert_eq!(m.path, dir.path().join("d.csv"));
        assert_eq!(load_csv(&m).unwrap().features.column(0), vec![1.0, 2.0]);
        let mp = tmp_file(&dir, "e.toml", "path = \"d.csv\"\nlabel_column = \"last\"\ncategorical = \"auto\"\nencoding = \"one_hot\"\n");
        let m = DatasetManifest::load(&mp).unwrap();
        assert_eq!(m.label_column, LabelColumn::Keyword(Keyword::Last));
        assert_eq!(m.encoding, Encoding::OneHot);
        let bad = tmp_file(&dir, "f.toml", "path = \"d.csv\"\nbogus = 1\n");
        assert!(DatasetManifest::load(&bad).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rows: Vec<Vec<f64>> = (0..25)
            .map(|_| (0..3).map(|_| rng.random_range(-1e3..1e3)).collect())
            .collect();
        let labels: Vec<usize> = (0..25).map(|i| i % 3).collect();
        let names = vec!["x".to_string(), "y, quoted".to_string(), "z".to_string()];
        let ds =
            LabeledDataset::new("r", Matrix::from_rows(&rows).unwrap(), labels, names).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_csv(&ds, &p).unwrap();
        let back = load_csv(&DatasetManifest::for_file(&p)).unwrap();
        assert_eq!(back.features.as_slice(), ds.features.as_slice());
        for i in 0..25 {
            assert_eq!(
                back.class_names[back.labels[i]],
                ds.class_names[ds.labels[i]]
            );
        }
    }

    fn sample_models() -> Vec<Fitted> {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..4).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        vec![
            Fitted::Linear(dc_hpca_fit(&x, 2, RobustScale::Sn, &HuberOptions::default()).unwrap()),
            Fitted::Linear(crate::reducers::pca_fit(&x, 3).unwrap()),
            Fitted::Kernel(kpca_fit(&x, 3, &KernelSpec::default()).unwrap()),
        ]
    }

    #[test]
    fn model_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        for (i, m) in sample_models().into_iter().enumerate() {
            let p = dir.path().join(format!("m{i}.json"));
            save_model(&m, &p).unwrap();
            match (m, load_model(&p).unwrap()) {
                (Fitted::Linear(a), Fitted::Linear(b)) => {
                    assert_eq!(a, b);
                    for (x, y) in a.basis.as_slice().iter().zip(b.basis.as_slice()) {
                        assert_eq!(x.to_bits(), y.to_bits());
                    }
                }
                (Fitted::Kernel(a), Fitted::Kernel(b)) => assert_eq!(a, b),
                _ => panic!("model kind changed"),
            }
        }
    }

    #[test]
    fn model_load_gates() {
        let m = &sample_models()[0];
        let text = model_to_json(m).unwrap();
        let p = Path::new("model.json");

        let bumped = text.replacen("\"format_version\": 1", "\"format_version\": 7", 1);
        assert!(matches!(
            model_from_json(&bumped, p),
            Err(Error::Version {
                found: 7,
                expected: 1
            })
        ));

        assert!(matches!(
            model_from_json(&text[..text.len() / 2], p),
            Err(Error::Format { .. })
        ));

        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let x = v["model"]["basis_columns"][0][0].as_f64().unwrap();
        v["model"]["basis_columns"][0][0] = serde_json::json!(x + 1e-3);
        let err = model_from_json(&v.to_string(), p).unwrap_err();
        assert!(err.to_string().contains("orthonormal"), "{err}");
    }

    #[test]
    fn plot_tsv_format() {
        let d = Direction {
            method: "pca".into(),
            x: 0.5,
            y: -0.25,
            angle_deg: 3.0,
        };
        let s = plot_tsv(std::slice::from_ref(&d));
        assert_eq!(
            s,
            "method\tx\ty\tangle_deg\npca\t0.500000\t-0.250000\t3.000000\n"
        );
        assert_eq!(s, plot_tsv(&[d]));
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_plot_tsv(&[], &dir.path().join("x.tsv")).is_err());
        assert!(!dir.path().join("x.tsv").exists());
    }

    #[test]
    fn failed_write_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("missing-dir").join("out.tsv");
        assert!(write_atomic(&target, b"x").is_err());
        assert!(!target.exists());
    }
}
