use medgraph_core::standards::{Catalog, DatasetMeta, Indicator, Sex, StandardDataset, StandardsError, XUnit, ZLabel};
use medgraph_core::Dataset;
use proptest::prelude::*;
use rand::{rngs::StdRng, seq::SliceRandom, Rng, SeedableRng};

fn meta() -> DatasetMeta {
    DatasetMeta::new("wfl-girls", Indicator::WeightForHeight, Sex::Female, XUnit::LengthCm)
}

const GIRLS: &str = include_str!("fixtures/wfl_girls_table1.csv");

fn line_of(err: &StandardsError) -> usize {
    use StandardsError::*;
    match err {
        MissingHeader { line }
        | UnknownZLabel { line, .. }
        | DuplicateZLabel { line, .. }
        | NonMonotonicX { line, .. }
        | NonMonotonicRow { line, .. }
        | FewerThanTwoRows { line }
        | FewerThanTwoZLabels { line }
        | MalformedNumber { line, .. }
        | FieldCount { line, .. }
        | Csv { line, .. } => *line,
        InvalidMeta(_) => 0,
    }
}

#[test]
fn parses_table_with_comment_and_crlf() {
    let ds = Dataset::parse(meta(), GIRLS).unwrap();
    assert_eq!(ds.rows().len(), 5);
    let crlf = GIRLS.replace('\n', "\r\n");
    let ds2 = Dataset::parse(meta(), &crlf).unwrap();
    assert_eq!(ds.digest(), ds2.digest());
}

#[test]
fn canonical_form_is_stable() {
    let ds = Dataset::parse(meta(), GIRLS).unwrap();
    let csv = ds.to_csv();
    assert!(csv.starts_with("x,SD3neg,SD2neg,SD1neg,SD0\n45,1.9,2.1,2.3,2.5\n"));
    let again = Dataset::parse(meta(), &csv).unwrap();
    assert_eq!(again, ds);
    assert_eq!(again.to_csv(), csv);
    assert_eq!(again.digest(), ds.digest());

    let reordered = "x,SD0,SD3neg,SD2neg,SD1neg\n\
                     45.0,2.5,1.9,2.1,2.3\n45.5,2.5,2.0,2.1,2.3\n46.0,2.6,2.0,2.2,2.4\n\
                     46.5,2.7,2.1,2.3,2.5\n47.0,2.8,2.2,2.4,2.6\n";
    assert_eq!(Dataset::parse(meta(), reordered).unwrap().digest(), ds.digest());

    let mut other = meta();
    other.sex = Sex::Male;
    assert_ne!(Dataset::parse(other, GIRLS).unwrap().digest(), ds.digest());
}

#[test]
fn error_lines_point_at_the_input() {
    let bad = GIRLS.replace("46.0,2.0,2.2,2.4,2.6", "46.0,2.0,2.x,2.4,2.6");
    let err = Dataset::parse(meta(), &bad).unwrap_err();
    assert_eq!(
        err,
        StandardsError::MalformedNumber {
            line: 5,
            column: 3,
            text: "2.x".into()
        }
    );
    assert!(err.to_string().starts_with("line 5, column 3"));
}

/// Data lines of the fixture (1-based line numbers in the file).
fn data_lines(text: &str) -> Vec<usize> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.starts_with('x'))
        .map(|(i, _)| i + 1)
        .collect()
}

/// Applies one invalidating edit and returns the text with the line the
/// parser must blame.
fn mutate(rng: &mut StdRng, text: &str) -> (String, usize) {
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let rows = data_lines(text);
    let header = rows[0] - 1;
    let row = *rows.choose(rng).unwrap();
    let kind = rng.gen_range(0..8);
    let mut fields: Vec<String> = lines[row - 1].split(',').map(str::to_string).collect();
    let blame = match kind {
        0 => {
            let col = rng.gen_range(1..fields.len() - 1);
            fields.swap(col, col + 1);
            row
        }
        1 => {
            let col = rng.gen_range(0..fields.len());
            fields[col] = ["abc", "1.2.3", "", "NaN", "inf", "1e", "--2"]
                .choose(rng)
                .unwrap()
                .to_string();
            row
        }
        2 => {
            fields.pop();
            row
        }
        3 => {
            fields.push("9.9".into());
            row
        }
        4 => {
            let i = rows.iter().position(|&r| r == row).unwrap();
            let j = if i == 0 { 1 } else { i - 1 };
            lines.swap(rows[i] - 1, rows[j] - 1);
            let blame = rows[i].max(rows[j]);
            return (lines.join("\n") + "\n", blame);
        }
        5 => {
            let mut h: Vec<String> = lines[header - 1].split(',').map(str::to_string).collect();
            let col = rng.gen_range(1..h.len());
            h[col] = ["SD4", "SD3neg ", "z", "SDneg"].choose(rng).unwrap().to_string();
            if h[col] == "SD3neg " {
                h[col] = h[1 + (col % (h.len() - 1))].clone();
            }
            lines[header - 1] = h.join(",");
            return (lines.join("\n") + "\n", header);
        }
        6 => {
            let prev = rows.iter().position(|&r| r == row).unwrap();
            let other = if prev == 0 { rows[1] } else { rows[prev - 1] };
            let other_x = lines[other - 1].split(',').next().unwrap().to_string();
            fields[0] = other_x;
            rows[prev.max(rows.iter().position(|&r| r == other).unwrap())]
        }
        _ => {
            let v: f64 = fields[1].parse().unwrap();
            fields[1] = format!("{}", -v - 100.0);
            fields[2] = format!("{}", -v - 200.0);
            row
        }
    };
    lines[row - 1] = fields.join(",");
    (lines.join("\n") + "\n", blame)
}

#[test]
fn random_mutations_are_rejected_at_the_right_line() {
    let mut rng = StdRng::seed_from_u64(4242);
    for _ in 0..2000 {
        let (text, blame) = mutate(&mut rng, GIRLS);
        match Dataset::parse(meta(), &text) {
            Ok(_) => panic!("accepted mutated table:\n{text}"),
            Err(e) => assert_eq!(line_of(&e), blame, "{e}\n{text}"),
        }
    }
}

#[test]
fn structural_errors() {
    assert!(matches!(
        Dataset::parse(meta(), ""),
        Err(StandardsError::MissingHeader { .. })
    ));
    assert!(matches!(
        Dataset::parse(meta(), "length,SD0,SD1\n1,2,3\n2,3,4\n"),
        Err(StandardsError::MissingHeader { line: 1 })
    ));
    assert!(matches!(
        Dataset::parse(meta(), "x,SD0\n1,2\n2,3\n"),
        Err(StandardsError::FewerThanTwoZLabels { line: 1 })
    ));
    assert!(matches!(
        Dataset::parse(meta(), "x,SD0,SD1\n1,2,3\n"),
        Err(StandardsError::FewerThanTwoRows { .. })
    ));
    assert!(matches!(
        Dataset::parse(meta(), "x,SD0,SD0\n1,2,3\n2,3,4\n"),
        Err(StandardsError::DuplicateZLabel { line: 1, .. })
    ));
}

#[test]
fn catalog_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let catalog = Catalog::open(dir.path()).unwrap();
    let ds = Dataset::parse(meta(), GIRLS).unwrap();
    let digest = catalog.put(&ds).unwrap();
    assert_eq!(digest, ds.digest());
    let back: Dataset = catalog.get("wfl-girls").unwrap();
    assert_eq!(back, ds);
    let reopened = Catalog::open(dir.path()).unwrap();
    let list = reopened.list().unwrap();
    assert_eq!(list.len(), 1);
    assert_eq!(list[0].digest, digest);
    assert!(reopened.get::<f64>("missing").is_err());
}

fn arb_dataset() -> impl Strategy<Value = Dataset> {
    (
        proptest::sample::subsequence((-3i8..=3).collect::<Vec<_>>(), 2..=7),
        2usize..12,
        any::<u64>(),
    )
        .prop_map(|(labels, n, seed)| {
            let mut rng = StdRng::seed_from_u64(seed);
            // exact decimals: integers of tenths and hundredths
            let mut x_tenths: i64 = rng.gen_range(0..1000);
            let rows = (0..n)
                .map(|_| {
                    x_tenths += rng.gen_range(1..50);
                    let mut v_hundredths: i64 = rng.gen_range(10..1000);
                    let values = labels
                        .iter()
                        .map(|_| {
                            v_hundredths += rng.gen_range(1..30);
                            v_hundredths as f64 / 100.0
                        })
                        .collect();
                    (x_tenths as f64 / 10.0, values)
                })
                .collect();
            let labels = labels.into_iter().map(|l| ZLabel::new(l).unwrap()).collect();
            Dataset::new(meta(), labels, rows).unwrap()
        })
}

proptest! {
    #[test]
    fn serialize_parse_round_trip(ds in arb_dataset()) {
        let csv = ds.to_csv();
        let back = Dataset::parse(meta(), &csv).unwrap();
        prop_assert_eq!(back.to_csv(), csv);
        prop_assert_eq!(back.digest(), ds.digest());
        let narrow: StandardDataset<f32> = ds.cast();
        prop_assert_eq!(narrow.to_csv(), ds.to_csv());
    }
}
