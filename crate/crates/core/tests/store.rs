mod common;

use terc::container::{ContainerReader, SectionKind};
use terc::simgen::rng::SimRng;
use terc::store::{index_build, stats, FilterSpec, Measure, MetadataStore, Predicate};
use terc::Error;

use common::store::{oracle, random_predicate, random_rows};

#[test]
fn random_filters_match_brute_force_scan() {
    let mut rng = SimRng::new(11);
    let store = MetadataStore::from_rows(random_rows(&mut rng, 300));
    for _ in 0..300 {
        let preds: Vec<Predicate> = (0..1 + rng.below(3)).map(|_| random_predicate(&mut rng, store.rows())).collect();
        let expected: Vec<(String, u64)> = store
            .rows()
            .iter()
            .filter(|r| preds.iter().all(|p| oracle(r, p)))
            .map(|r| (r.container_path.clone(), r.entry_ordinal))
            .collect();
        let filter = FilterSpec::new(preds);
        assert_eq!(store.query(&filter).unwrap(), expected, "{filter:?}");
        // Same result through the text form.
        let text: Vec<String> = filter.predicates.iter().map(|p| p.to_string()).collect();
        assert_eq!(store.query(&FilterSpec::parse_all(&text).unwrap()).unwrap(), expected, "{text:?}");
    }
}

#[test]
fn bad_filters_are_errors() {
    let store = MetadataStore::from_rows(random_rows(&mut SimRng::new(1), 5));
    let q = |s: &str| store.query(&FilterSpec::parse_all(&[s]).unwrap());
    assert!(matches!(q("bogus=1"), Err(Error::UnknownField(_))));
    assert!(matches!(q("duration_steps>abc"), Err(Error::InvalidFilter(_))));
    assert!(matches!("duration_steps".parse::<Predicate>(), Err(Error::InvalidFilter(_))));
    assert_eq!(store.query(&FilterSpec::default()).unwrap().len(), 5);
}

#[test]
fn store_survives_save_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let store = MetadataStore::from_rows(random_rows(&mut SimRng::new(2), 200));
    let path = dir.path().join("s.idx");
    store.save(&path).unwrap();
    assert_eq!(MetadataStore::load(&path).unwrap(), store);

    let mut bytes = std::fs::read(&path).unwrap();
    bytes.pop();
    std::fs::write(&path, &bytes).unwrap();
    assert!(MetadataStore::load(&path).is_err());
}

#[test]
fn index_build_reads_only_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let spec = common::w1_with_steps(50);
    let mut paths = Vec::new();
    for c in 0..2u64 {
        let path = dir.path().join(format!("c{c}.terc"));
        let seqs: Vec<_> = (0..3).map(|k| common::w1_replay(&spec, c, k)).collect();
        common::write_container(&path, &spec.schema(), &seqs);
        paths.push(path);
    }
    let missing = dir.path().join("missing.terc");
    let garbage = dir.path().join("garbage.terc");
    std::fs::write(&garbage, b"not a container").unwrap();
    let mut all = paths.clone();
    all.push(missing.clone());
    all.push(garbage.clone());

    let report = index_build(&all);
    assert_eq!(report.store.len(), 6);
    let failed: Vec<_> = report.failures.iter().map(|f| f.path.clone()).collect();
    assert_eq!(failed, vec![missing, garbage]);

    let mut metadata_bytes = 0;
    for p in &paths {
        let r = ContainerReader::open(p).unwrap();
        for e in 0..r.entry_count() {
            metadata_bytes += r.sections(e, 1).unwrap()[SectionKind::Metadata as usize].header.uncompressed_len;
        }
    }
    assert_eq!(report.decompressed_bytes, metadata_bytes);

    let row = &report.store.rows()[4];
    assert_eq!(row.entry_ordinal, 1);
    assert_eq!(row.duration_steps, 50);
    assert_eq!(row.entity_count_peak, 64);
    let seq = common::w1_replay(&spec, 1, 1);
    assert_eq!(row.replay_id, seq.metadata.replay_id);
    assert_eq!(row.action_count, seq.metadata.action_count);
    let minutes = 50.0 / 22.4 / 60.0;
    assert!((row.apm_analog - seq.metadata.action_count as f64 / minutes).abs() < 1e-9);
}

#[test]
fn stats_counts_and_moments() {
    let rows = random_rows(&mut SimRng::new(3), 400);
    let store = MetadataStore::from_rows(rows.clone());
    let table = stats(
        &store,
        "scenario_tag",
        Some("duration_steps"),
        &[Measure::Count, Measure::Mean, Measure::Std, Measure::Histogram(4)],
    )
    .unwrap();
    assert_eq!(table.rows.iter().map(|r| r.count).sum::<u64>(), 400);
    let groups: Vec<&str> = table.rows.iter().map(|r| r.group.as_str()).collect();
    let mut sorted = groups.clone();
    sorted.sort();
    assert_eq!(groups, sorted);
    for g in &table.rows {
        let v: Vec<f64> = rows
            .iter()
            .filter(|r| r.scenario_tag == g.group)
            .map(|r| r.duration_steps as f64)
            .collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        assert!((g.mean.unwrap() - mean).abs() < 1e-9 * mean.max(1.0));
        assert!((g.std.unwrap() - var.sqrt()).abs() < 1e-9 * var.sqrt().max(1.0));
        assert_eq!(g.histogram.as_ref().unwrap().counts.iter().sum::<u64>(), v.len() as u64);
    }
    assert!(matches!(
        stats(&store, "nope", None, &[Measure::Count]),
        Err(Error::UnknownField(_))
    ));
}
