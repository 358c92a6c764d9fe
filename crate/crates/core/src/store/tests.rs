use super::*;

pub(crate) fn row(path: &str, ordinal: u64, tag: &str, duration: u64, actions: u64, label: Option<i32>) -> MetadataRow {
    MetadataRow {
        container_path: path.into(),
        entry_ordinal: ordinal,
        replay_id: format!("{tag}-{ordinal}"),
        scenario_tag: tag.into(),
        duration_steps: duration,
        entity_count_peak: 8,
        action_count: actions,
        outcome_label: label,
        schema_hash: 0xfeed,
        apm_analog: apm(actions, duration, 1.0 / 22.4),
    }
}

fn store() -> MetadataStore {
    MetadataStore::from_rows(vec![
        row("b.terc", 0, "warehouse", 700, 10, Some(1)),
        row("a.terc", 1, "warehouse", 700, 20, Some(0)),
        row("a.terc", 0, "depot", 9000, 30, None),
    ])
}

fn q(s: &MetadataStore, terms: &[&str]) -> Result<Vec<(String, u64)>> {
    s.query(&FilterSpec::parse_all(terms)?)
}

#[test]
fn apm_from_steps() {
    // 1344 steps at 22.4 steps/s is one minute.
    assert!((apm(90, 1344, 1.0 / 22.4) - 90.0).abs() < 1e-9);
    assert_eq!(apm(5, 0, 1.0 / 22.4), 0.0);
}

#[test]
fn rows_sorted_by_path_then_ordinal() {
    let keys: Vec<_> = store().rows().iter().map(|r| (r.container_path.clone(), r.entry_ordinal)).collect();
    assert_eq!(keys, vec![("a.terc".into(), 0), ("a.terc".into(), 1), ("b.terc".into(), 0)]);
}

#[test]
fn query_semantics() {
    let s = store();
    assert_eq!(q(&s, &[]).unwrap().len(), 3);
    assert_eq!(q(&s, &["duration_steps>=5000"]).unwrap(), vec![("a.terc".into(), 0)]);
    assert_eq!(q(&s, &["duration_steps < 5000", "action_count>10"]).unwrap(), vec![("a.terc".into(), 1)]);
    assert_eq!(q(&s, &["scenario_tag=warehouse"]).unwrap().len(), 2);
    assert_eq!(q(&s, &["scenario_tag > d"]).unwrap().len(), 3);
    assert_eq!(q(&s, &["replay_id =string depot-0"]).unwrap(), vec![("a.terc".into(), 0)]);
    assert_eq!(q(&s, &["duration_steps =string 700"]).unwrap().len(), 2);
    // Null never matches.
    assert_eq!(q(&s, &["outcome_label>=0"]).unwrap().len(), 2);
    assert_eq!(q(&s, &["apm_analog>1.5"]).unwrap().len(), 3);
    assert_eq!(q(&s, &["duration_steps<=700.5"]).unwrap().len(), 2);
}

#[test]
fn query_errors() {
    let s = store();
    assert!(matches!(q(&s, &["nonexistent=1"]), Err(Error::UnknownField(f)) if f == "nonexistent"));
    assert!(matches!(q(&s, &["duration_steps>=lots"]), Err(Error::InvalidFilter(_))));
    assert!(matches!("duration_steps".parse::<Predicate>(), Err(Error::InvalidFilter(_))));
    assert!(matches!("duration_steps!5".parse::<Predicate>(), Err(Error::InvalidFilter(_))));
}

#[test]
fn predicate_parsing() {
    let p: Predicate = "a_b <= 3".parse().unwrap();
    assert_eq!(p, Predicate::new("a_b", FilterOp::Le, "3"));
    assert_eq!("x≥2".parse::<Predicate>().unwrap().op, FilterOp::Ge);
    assert_eq!("x==2".parse::<Predicate>().unwrap().op, FilterOp::Eq);
    let s = "tag =string two words".parse::<Predicate>().unwrap();
    assert_eq!(s, Predicate::new("tag", FilterOp::StrEq, "two words"));
    for p in [s, Predicate::new("x", FilterOp::Gt, "4")] {
        assert_eq!(p.to_string().parse::<Predicate>().unwrap(), p);
    }
}

#[test]
fn stats_examples() {
    let rows = (0..20).map(|i| row("w.terc", i, "warehouse", 700, i, Some(0))).collect();
    let s = MetadataStore::from_rows(rows);
    let t = stats(&s, "scenario_tag", Some("duration_steps"), &[Measure::Count, Measure::Mean, Measure::Std]).unwrap();
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.rows[0].group, "warehouse");
    assert_eq!(t.rows[0].count, 20);
    assert_eq!(t.rows[0].mean, Some(700.0));
    assert_eq!(t.rows[0].std, Some(0.0));
}

#[test]
fn stats_unbiased_std_and_histogram() {
    let t = stats(
        &store(),
        "scenario_tag",
        Some("action_count"),
        &[Measure::Mean, Measure::Std, Measure::Histogram(2)],
    )
    .unwrap();
    assert_eq!(t.rows.iter().map(|r| r.group.as_str()).collect::<Vec<_>>(), ["depot", "warehouse"]);
    let w = &t.rows[1];
    assert_eq!(w.mean, Some(15.0));
    // values 10, 20: sum of squares 50 over n-1 = 1
    assert!((w.std.unwrap() - 50f64.sqrt()).abs() < 1e-12);
    assert_eq!(t.rows[0].std, None);
    let h = w.histogram.as_ref().unwrap();
    assert_eq!(h.edges, vec![10.0, 20.0, 30.0]);
    assert_eq!(h.counts, vec![1, 1]);
    assert_eq!(t.rows[0].histogram.as_ref().unwrap().counts, vec![0, 1]);
}

#[test]
fn stats_null_group_and_errors() {
    let t = stats(&store(), "outcome_label", None, &[Measure::Count]).unwrap();
    let groups: Vec<_> = t.rows.iter().map(|r| (r.group.as_str(), r.count)).collect();
    assert_eq!(groups, [("", 1), ("0", 1), ("1", 1)]);
    assert!(matches!(stats(&store(), "nope", None, &[Measure::Count]), Err(Error::UnknownField(_))));
    assert!(stats(&store(), "apm_analog", None, &[Measure::Count]).is_err());
    assert!(stats(&store(), "scenario_tag", None, &[Measure::Mean]).is_err());
    assert!(stats(&store(), "scenario_tag", Some("replay_id"), &[Measure::Mean]).is_err());
    assert_eq!("histogram:4".parse::<Measure>().unwrap(), Measure::Histogram(4));
    assert!("histogram:0".parse::<Measure>().is_err());
}

#[test]
fn stats_csv() {
    let t = stats(&store(), "scenario_tag", Some("action_count"), &[Measure::Count, Measure::Std]).unwrap();
    let mut out = Vec::new();
    t.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().next(), Some("scenario_tag,count,std"));
    assert!(text.lines().nth(1).unwrap().starts_with("depot,1,"));
}

#[test]
fn persist_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.idx");
    let mut rows = store().rows().to_vec();
    rows[0].scenario_tag = "ünïcode, with comma".into();
    rows[1].outcome_label = Some(-7);
    let s = MetadataStore::from_rows(rows);
    s.save(&path).unwrap();
    assert_eq!(MetadataStore::load(&path).unwrap(), s);

    MetadataStore::default().save(&path).unwrap();
    assert!(MetadataStore::load(&path).unwrap().is_empty());
}

#[test]
fn persist_rejects_damage() {
    let bytes = persist::encode(store().rows());
    assert!(persist::decode(&bytes[..bytes.len() - 1]).is_err());
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(persist::decode(&extra).is_err());
    let mut magic = bytes.clone();
    magic[0] = b'X';
    assert!(persist::decode(&magic).is_err());
    let text = String::from_utf8_lossy(&bytes).replace("column schema_hash u64", "column schema_hash f64");
    assert!(persist::decode(text.as_bytes()).is_err());
}

#[test]
fn csv_export_has_header_and_rows() {
    let s = store();
    let mut out = Vec::new();
    MetadataStore::export_csv(s.rows(), &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("container_path,entry_ordinal,replay_id"));
    assert!(lines[1].starts_with("a.terc,0,depot-0,depot,9000,8,30,,"));
}
