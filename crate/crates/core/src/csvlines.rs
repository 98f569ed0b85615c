//! Line-oriented CSV reading with exact source line numbers.
//!
//! Each physical line is one record. Blank lines and lines starting with `#`
//! are skipped, CRLF endings are accepted and fields are trimmed.

/// A record and the 1-based line it came from.
pub(crate) struct Line {
    pub number: usize,
    pub fields: Vec<String>,
}

/// Records of `text`, or the first line that is not valid CSV.
pub(crate) fn records(text: &str) -> Result<Vec<Line>, (usize, String)> {
    let mut out = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(line.as_bytes());
        let mut rec = csv::StringRecord::new();
        match reader.read_record(&mut rec) {
            Ok(_) => out.push(Line {
                number: i + 1,
                fields: rec.iter().map(str::to_string).collect(),
            }),
            Err(e) => return Err((i + 1, e.to_string())),
        }
    }
    Ok(out)
}
