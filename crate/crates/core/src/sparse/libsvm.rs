//! LIBSVM text format: `<label> <index>:<value> ...` with 1-based,
//! strictly increasing feature indices.

use std::io::{BufRead, Write};

use super::{CsrMatrix, LabeledDataset};
use crate::error::{Error, Result};

/// How raw labels in the file map onto ±1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LabelPolicy {
    /// Labels must be -1 or +1.
    PlusMinusOne,
    /// 0 maps to -1, 1 to +1.
    ZeroOne,
    /// Accepts -1, 0 (both to -1) and +1.
    Auto,
    /// Arbitrary two-class encoding, e.g. mushrooms' {1, 2}.
    Map { negative: f64, positive: f64 },
}

impl LabelPolicy {
    fn apply(&self, raw: f64) -> Option<f64> {
        let (neg, pos): (&[f64], &[f64]) = match self {
            LabelPolicy::PlusMinusOne => (&[-1.0], &[1.0]),
            LabelPolicy::ZeroOne => (&[0.0], &[1.0]),
            LabelPolicy::Auto => (&[-1.0, 0.0], &[1.0]),
            LabelPolicy::Map { negative, positive } => {
                return if raw == *negative {
                    Some(-1.0)
                } else if raw == *positive {
                    Some(1.0)
                } else {
                    None
                }
            }
        };
        if neg.contains(&raw) {
            Some(-1.0)
        } else if pos.contains(&raw) {
            Some(1.0)
        } else {
            None
        }
    }
}

/// Parses a LIBSVM stream. `num_features` forces a column count at least
/// as large as the largest index seen.
pub fn parse_libsvm<R: BufRead>(
    reader: R,
    policy: LabelPolicy,
    num_features: Option<usize>,
) -> Result<LabeledDataset> {
    let mut row_offsets = vec![0];
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut max_col = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        let mut tokens = body.split_ascii_whitespace();
        let raw = tokens.next().unwrap_or_default();
        let raw: f64 = raw.parse().map_err(|_| err(format!("bad label `{raw}`")))?;
        let label = policy
            .apply(raw)
            .ok_or_else(|| err(format!("label {raw} not allowed by {policy:?}")))?;

        let mut prev = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected index:value, found `{tok}`")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| err(format!("bad feature index `{idx}`")))?;
            if idx == 0 {
                return Err(err("feature indices are 1-based".into()));
            }
            if idx <= prev {
                return Err(err(format!(
                    "feature index {idx} does not increase (after {prev})"
                )));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| err(format!("bad feature value `{val}`")))?;
            if !val.is_finite() {
                return Err(err(format!("non-finite feature value `{val}`")));
            }
            prev = idx;
            col_indices.push(idx - 1);
            values.push(val * label);
        }
        max_col = max_col.max(prev);
        labels.push(label);
        row_offsets.push(values.len());
    }

    let num_cols = match num_features {
        Some(n) if n < max_col => {
            return Err(Error::Config(format!(
                "--num-features {n} is smaller than the largest index {max_col}"
            )))
        }
        Some(n) => n,
        None => max_col,
    };
    let a_tilde = CsrMatrix::new(labels.len(), num_cols, row_offsets, col_indices, values)?;
    LabeledDataset::from_scaled(a_tilde, labels)
}

pub fn parse_libsvm_str(
    text: &str,
    policy: LabelPolicy,
    num_features: Option<usize>,
) -> Result<LabeledDataset> {
    parse_libsvm(text.as_bytes(), policy, num_features)
}

/// Writes the unscaled data in canonical form: labels `+1`/`-1`, shortest
/// round-trip float formatting.
pub fn write_libsvm<W: Write>(d: &LabeledDataset, mut out: W) -> Result<()> {
    let a = d.a_tilde();
    for (i, &label) in d.labels().iter().enumerate() {
        out.write_all(if label > 0.0 { b"+1" } else { b"-1" })?;
        let (idx, val) = a.row(i);
        for (&c, &v) in idx.iter().zip(val) {
            write!(out, " {}:{}", c + 1, v * label)?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn transcribes_rows() {
        let d = parse_libsvm_str("+1 1:0.5 3:2.0\n", LabelPolicy::PlusMinusOne, None).unwrap();
        assert_eq!(d.a_tilde().row(0), (&[0usize, 2][..], &[0.5, 2.0][..]));
        assert_eq!(d.labels(), [1.0]);
        assert_eq!(d.num_features(), 3);
    }

    #[test]
    fn negative_label_scales_row() {
        let d = parse_libsvm_str("-1 2:1.0", LabelPolicy::PlusMinusOne, None).unwrap();
        assert_eq!(d.a_tilde().row(0), (&[1usize][..], &[-1.0][..]));
    }

    #[test]
    fn zero_one_policy() {
        let d = parse_libsvm_str("0 1:1.0", LabelPolicy::ZeroOne, None).unwrap();
        assert_eq!(d.labels(), [-1.0]);
        assert_eq!(d.a_tilde().values(), [-1.0]);
        let d = parse_libsvm_str(
            "2 1:1\n1 1:1",
            LabelPolicy::Map {
                negative: 1.0,
                positive: 2.0,
            },
            None,
        )
        .unwrap();
        assert_eq!(d.labels(), [1.0, -1.0]);
    }

    #[test]
    fn blank_lines_and_comments_are_skipped() {
        let d = parse_libsvm_str("\n+1 1:1 # note\n\n-1\n", LabelPolicy::Auto, Some(4)).unwrap();
        assert_eq!(d.num_points(), 2);
        assert_eq!(d.num_features(), 4);
        assert_eq!(d.nnz(), 1);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("+1 1:1\n+1 2:1 2:3\n", 2),
            ("+1 3:1 1:1\n", 1),
            ("+1 1:1\n\n+1 x:1\n", 3),
            ("+1 1-1\n", 1),
            ("+1 0:1\n", 1),
            ("+1 1:abc\n", 1),
            ("+1 1:inf\n", 1),
            ("maybe 1:1\n", 1),
        ];
        for (text, line) in cases {
            match parse_libsvm_str(text, LabelPolicy::PlusMinusOne, None) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: expected parse error, got {other:?}"),
            }
        }
    }

    #[test]
    fn unknown_label_rejected() {
        assert!(parse_libsvm_str("0 1:1", LabelPolicy::PlusMinusOne, None).is_err());
        assert!(parse_libsvm_str("-1 1:1", LabelPolicy::ZeroOne, None).is_err());
        assert!(parse_libsvm_str("3 1:1", LabelPolicy::Auto, None).is_err());
    }

    #[test]
    fn feature_override_too_small() {
        assert!(matches!(
            parse_libsvm_str("+1 5:1", LabelPolicy::Auto, Some(3)),
            Err(Error::Config(_))
        ));
    }

    fn canonical_text() -> impl Strategy<Value = String> {
        let row = (
            any::<bool>(),
            prop::collection::btree_map(1usize..40, -1e3f64..1e3, 0..8),
        );
        prop::collection::vec(row, 1..10).prop_map(|rows| {
            let mut text = String::new();
            for (pos, feats) in rows {
                text.push_str(if pos { "+1" } else { "-1" });
                for (i, v) in feats {
                    text.push_str(&format!(" {i}:{v}"));
                }
                text.push('\n');
            }
            text
        })
    }

    proptest! {
        #[test]
        fn serialize_inverts_parse(text in canonical_text()) {
            let d = parse_libsvm_str(&text, LabelPolicy::PlusMinusOne, Some(40)).unwrap();
            let mut out = Vec::new();
            write_libsvm(&d, &mut out).unwrap();
            prop_assert_eq!(String::from_utf8(out).unwrap(), text);
        }
    }
}
