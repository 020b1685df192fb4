use std::fs;

use inkfatigue::features::{extract_features, Catalog, FeatureId};
use inkfatigue::ink::{load_corpus, validate_corpus, write_corpus, SetId, TaskId};
use inkfatigue::protocol::AuxRecord;
use inkfatigue::synth::{generate_corpus, generate_task, SynthProfile};

fn small_profile(n_subjects: usize) -> SynthProfile {
    SynthProfile {
        n_subjects,
        seed: 11,
        ..Default::default()
    }
}

#[test]
fn generated_corpus_survives_disk_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut corpus = generate_corpus(&small_profile(3)).unwrap();
    corpus.insert_aux(
        "U02",
        SetId::S4,
        AuxRecord {
            lactate: Some(9.5),
            flight_time: Some(0.48),
            force: None,
            velocity: Some(1.2),
            rpe: Some(8.0),
        },
    );
    write_corpus(&corpus, dir.path()).unwrap();
    let (loaded, gaps) = load_corpus(dir.path()).unwrap();
    assert!(gaps.is_empty());
    assert_eq!(loaded, corpus);
    assert!(validate_corpus(dir.path()).unwrap().is_empty());
}

#[test]
fn one_subject_writes_45_task_files() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(&generate_corpus(&small_profile(1)).unwrap(), dir.path()).unwrap();
    let mut files = 0;
    for set in SetId::ALL {
        for entry in fs::read_dir(dir.path().join("U01").join(set.as_str())).unwrap() {
            assert!(entry.unwrap().file_name().to_string_lossy().ends_with(".ink"));
            files += 1;
        }
    }
    assert_eq!(files, 45);
}

#[test]
fn default_profile_gives_900_valid_records() {
    let corpus = generate_corpus(&SynthProfile::default()).unwrap();
    assert_eq!(corpus.len(), 900);
    assert!(corpus.gaps().missing.is_empty());
    let catalog = Catalog::standard();
    for record in corpus.records() {
        let v = extract_features(record, &catalog).unwrap();
        assert!(v.values.iter().all(|(_, x)| x.is_finite()));
    }
}

#[test]
fn validation_reports_every_bad_file_with_its_line() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(&generate_corpus(&small_profile(2)).unwrap(), dir.path()).unwrap();
    let first = dir.path().join("U01/S2/task4.ink");
    let second = dir.path().join("U02/S5/task9.ink");
    let corrupt = |path: &std::path::Path, line: usize, replacement: &str| {
        let text = fs::read_to_string(path).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines[line - 1] = replacement;
        fs::write(path, lines.join("\n") + "\n").unwrap();
    };
    corrupt(&first, 12, "1 2 3");
    corrupt(&second, 7, "1 2 100 400 30");
    let diagnostics = validate_corpus(dir.path()).unwrap();
    assert_eq!(diagnostics.len(), 2);
    assert_eq!(diagnostics[0].path, first);
    assert_eq!(diagnostics[0].line, Some(12));
    assert_eq!(diagnostics[1].path, second);
    assert_eq!(diagnostics[1].line, Some(7));
    assert!(diagnostics[1].message.contains("azimuth"));
    assert!(load_corpus(dir.path()).is_err());
}

#[test]
fn slower_writing_moves_speed_and_timing_features() {
    let mut profile = small_profile(1);
    profile.session_variation = 0.0;
    profile.set_mut(SetId::S4).speed_scale = 0.7;
    profile.set_mut(SetId::S4).air_inflation = 1.5;
    let catalog = Catalog::standard();
    let task = TaskId::new(6).unwrap();
    let features = |set| extract_features(&generate_task(&profile, "U01", set, task).unwrap(), &catalog).unwrap();
    let (rest, tired) = (features(SetId::S1), features(SetId::S4));
    let get = |v: &inkfatigue::features::FeatureVector, f: FeatureId| v.get(f).unwrap();
    let air = FeatureId::TimeInAir;
    let down = FeatureId::TimeDown;
    let speed: FeatureId = "mean_speed".parse().unwrap();
    assert!(get(&tired, air) > 1.2 * get(&rest, air));
    assert!(get(&tired, down) > get(&rest, down));
    assert!(get(&tired, speed) < get(&rest, speed));
}
