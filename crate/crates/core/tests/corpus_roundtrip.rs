use std::fs;
use std::path::Path;

use ivtr_core::corpus_io::{load_corpus, write_corpus, CorpusError};
use ivtr_core::synthlab::{gen_score_corpus, Reliance, RelianceTable, SynthConfig, SynthLayout, SYNTHESIZABLE};

fn config(seed: u64) -> SynthConfig {
    SynthConfig {
        d: 8,
        n_per_cell: 6,
        seed,
        layout: SynthLayout {
            general_subdomains: 2,
            personalized_subdomains: 1,
            ..SynthLayout::default()
        },
        ..SynthConfig::default()
    }
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn write_load_write_is_byte_identical() {
    for seed in 0..4 {
        let table: RelianceTable = SYNTHESIZABLE
            .into_iter()
            .map(|k| (k, Reliance { beta_inv: 1.0, beta_cls: 0.3, noise: 0.1 }))
            .collect();
        let c = gen_score_corpus(&config(seed), &table).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let path = write_corpus(a.path(), &c.manifest, &c.files, Some(&c.store)).unwrap();
        let loaded = load_corpus(&path).unwrap();
        let per_entry: Vec<Vec<_>> = (0..loaded.manifest.entries.len()).map(|i| loaded.entry_records(i).to_vec()).collect();
        write_corpus(b.path(), &loaded.manifest, &per_entry, loaded.activations.as_ref()).unwrap();
        assert_eq!(files(a.path()), files(b.path()));
        assert_eq!(loaded.records, c.records().cloned().collect::<Vec<_>>());
    }
}

#[test]
fn corrupted_record_is_a_data_violation() {
    let c = gen_score_corpus(&config(1), &RelianceTable::new()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = write_corpus(dir.path(), &c.manifest, &c.files, Some(&c.store)).unwrap();
    let first = dir.path().join(&c.manifest.entries[0].path);
    let text = fs::read_to_string(&first).unwrap().replacen("\"rank\":", "\"rank\":0,\"x\":", 1);
    fs::write(&first, text).unwrap();
    let err = load_corpus(&path).unwrap_err();
    assert!(err.is_data_violation(), "{err}");
    assert!(!matches!(err, CorpusError::Io { .. }));
}
