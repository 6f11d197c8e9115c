use std::io::{Read, Write};

use super::{EstimatorError, SeriesKind, SeriesRecord, SpreadEventSeries};

/// Reads an event CSV with at least the columns `t,s_pre,s_post,kind` (any
/// order, extra columns ignored) and an optional `mid`. Lines starting with
/// `#` are skipped. A market or limit record with an unchanged spread is
/// read as `Unknown`, so full engine trajectories load directly.
pub fn read_series_csv<R: Read>(input: R) -> Result<SpreadEventSeries, EstimatorError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let header_err = |reason: String| EstimatorError::Parse { line: 1, reason };
    let headers = rdr.headers().map_err(|e| header_err(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let need = |name: &str| col(name).ok_or_else(|| header_err(format!("missing column `{name}`")));
    let (ct, cpre, cpost, ckind) = (need("t")?, need("s_pre")?, need("s_post")?, need("kind")?);
    let cmid = col("mid");

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| EstimatorError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let bad = |reason: String| EstimatorError::Parse { line, reason };
        let field = |i: usize| row.get(i).unwrap_or("");
        let t = field(ct).parse::<u64>().map_err(|e| bad(format!("t: {e}")))?;
        let s_pre = field(cpre).parse::<u32>().map_err(|e| bad(format!("s_pre: {e}")))?;
        let s_post = field(cpost).parse::<u32>().map_err(|e| bad(format!("s_post: {e}")))?;
        let mut kind = SeriesKind::parse(field(ckind))
            .ok_or_else(|| bad(format!("unknown kind `{}`", field(ckind))))?;
        if s_pre == s_post {
            kind = SeriesKind::Unknown;
        }
        let mid = match cmid {
            Some(c) if !field(c).is_empty() => {
                Some(field(c).parse::<i64>().map_err(|e| bad(format!("mid: {e}")))?)
            }
            _ => None,
        };
        records.push(SeriesRecord { t, s_pre, s_post, kind, mid });
    }
    SpreadEventSeries::new(records)
}

/// Writes `t,s_pre,s_post,kind` after the given `#` comment lines. With
/// `include_mid`, a trailing `mid` column is added when every record has one.
pub fn write_series_csv<W: Write>(
    series: &SpreadEventSeries,
    comments: &[String],
    include_mid: bool,
    mut w: W,
) -> std::io::Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    let with_mid =
        include_mid && !series.is_empty() && series.records().iter().all(|r| r.mid.is_some());
    if with_mid {
        writeln!(w, "t,s_pre,s_post,kind,mid")?;
    } else {
        writeln!(w, "t,s_pre,s_post,kind")?;
    }
    for r in series.records() {
        write!(w, "{},{},{},{}", r.t, r.s_pre, r.s_post, r.kind.label())?;
        match r.mid {
            Some(m) if with_mid => writeln!(w, ",{m}")?,
            _ => writeln!(w)?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_mid() {
        let s = SpreadEventSeries::new(vec![
            SeriesRecord { t: 0, s_pre: 3, s_post: 2, kind: SeriesKind::LimitOrder, mid: Some(9) },
            SeriesRecord { t: 4, s_pre: 2, s_post: 4, kind: SeriesKind::MarketOrder, mid: Some(12) },
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_series_csv(&s, &["events".to_string()], true, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# events\nt,s_pre,s_post,kind,mid\n0,3,2,limit,9\n"));
        assert_eq!(read_series_csv(buf.as_slice()).unwrap(), s);
        let mut plain = Vec::new();
        write_series_csv(&s, &[], false, &mut plain).unwrap();
        assert_eq!(String::from_utf8(plain).unwrap(), "t,s_pre,s_post,kind\n0,3,2,limit\n4,2,4,market\n");
    }

    #[test]
    fn reads_engine_trajectory_columns() {
        let text = "# c\nt,kind,side,s_pre,s_post,mid,gran_bid,gran_ask\n\
                    0,limit,buy,1,1,201,1.0,1.0\n1,market,sell,1,2,202,1.0,1.0\n\
                    2,cancel,sell,2,3,203,1.0,1.0\n";
        let s = read_series_csv(text.as_bytes()).unwrap();
        let kinds: Vec<_> = s.records().iter().map(|r| r.kind).collect();
        assert_eq!(kinds, [SeriesKind::Unknown, SeriesKind::MarketOrder, SeriesKind::Unknown]);
        assert_eq!(s.mids(), Some(vec![201, 202, 203]));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "t,s_pre,s_post,kind\n0,3,2,limit\n1,x,2,limit\n";
        match read_series_csv(text.as_bytes()) {
            Err(EstimatorError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            read_series_csv("t,s_pre,kind\n".as_bytes()),
            Err(EstimatorError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_series_csv("t,s_pre,s_post,kind\n0,2,3,limit\n".as_bytes()),
            Err(EstimatorError::InvalidSeries { .. })
        ));
    }
}
