use std::path::Path;
use std::process::{Command, Output};

use bogospec::cli::Bundle;

fn bogospec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bogospec")).args(args).output().expect("spawn bogospec")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let o = bogospec(&["hartree", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(o.status.code(), Some(66));

    let bad_g = write_config(dir.path(), "g.cfg", "model.kind = trap\ninteraction.g = -1\n");
    let o = bogospec(&["hartree", "--config", &bad_g, "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("interaction.g"));

    let unsorted = write_config(dir.path(), "n.cfg", "model.kind = torus\ned.N_list = [8, 4]\n");
    let o = bogospec(&["sweep", "--config", &unsorted, "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ed.N_list"));

    let ok = write_config(dir.path(), "ok.cfg", "model.kind = torus\n");
    assert_eq!(bogospec(&["fit", "--config", &ok]).status.code(), Some(2));
    assert_eq!(bogospec(&["hartree", "--config", &ok, "--format", "xml"]).status.code(), Some(2));
    assert_eq!(bogospec(&["validate", "--config", &ok, "--out", out]).status.code(), Some(0));
}

#[test]
fn torus_oracle_files_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "t.cfg", "model.kind = torus\nmodes.K = 2\ninteraction.g = 10\n");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let o = bogospec(&["torus-oracle", "--config", &cfg, "--out", d.to_str().unwrap(), "--format", "both"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for name in ["torus_oracle.csv", "torus_oracle_summary.csv", "torus_oracle.json"] {
        let x = std::fs::read(a.join(name)).unwrap();
        assert_eq!(x, std::fs::read(b.join(name)).unwrap(), "{name} differs between runs");
    }

    let json = Bundle::from_json(&std::fs::read_to_string(a.join("torus_oracle.json")).unwrap()).unwrap();
    let csv = Bundle::read_csv(&a, "torus-oracle", &["torus_oracle", "summary"]).unwrap();
    assert_eq!(json.tables, csv);

    let modes = &csv[0];
    let labels = modes.column("label").unwrap();
    let e = modes.column("e_p").unwrap();
    let k1 = labels.iter().position(|l| **l == bogospec::cli::Cell::text("[1]")).unwrap();
    assert!((e[k1].as_f64().unwrap() - 44.196).abs() < 1e-3);
    let summary = &csv[1];
    let trace = summary.rows.iter().find(|r| r[0] == bogospec::cli::Cell::text("trace_sum")).unwrap();
    assert!((trace[1].as_f64().unwrap() - 10.5638573748).abs() < 1e-9);
}

#[test]
fn zero_interaction_spectrum_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "z.cfg",
        "model.kind = trap\ninteraction.kind = zero\nspectrum.m_modes = 8\noutput.format = json\n",
    );
    let o = bogospec(&["spectrum", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!dir.path().join("spectrum.csv").exists());
    let bundle = Bundle::from_json(&std::fs::read_to_string(dir.path().join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(bundle.tables[0].columns, ["index", "e_i"]);
    assert_eq!(bundle.tables[0].rows.len(), 7);
    let summary = bundle.table("summary").unwrap();
    let trace = summary.rows.iter().find(|r| r[0] == bogospec::cli::Cell::text("trace_correction")).unwrap();
    assert!(trace[1].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn ed_compare_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e.cfg", "model.kind = torus\ninteraction.g = 1\ned.N = 8\n");
    let o = bogospec(&["ed-compare", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("ed_compare.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "N,E0_ed,E0_bog,delta0,delta0_sqrtN,gap1_ed,gap1_bog,depletion,TH_expect,overlap_sq,lemma1_lower_ok,lemma1_upper_ok,lemma3_ok"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "8");
    assert_eq!(&row[10..], ["true", "true", "true"]);
}
