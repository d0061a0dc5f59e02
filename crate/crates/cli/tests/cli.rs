use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tabex::synth::{self, DocSpec, InfoSpec, PageSpec, TextLine};
use tabex::PageDims;

fn tabex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tabex"))
        .args(args)
        .output()
        .expect("run tabex")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn text_doc(dir: &Path, name: &str, pages: &[&[&str]]) -> PathBuf {
    let pages = pages
        .iter()
        .map(|lines| {
            let mut page = PageSpec::new(PageDims::LETTER);
            for (i, text) in lines.iter().enumerate() {
                page.lines.push(TextLine {
                    left: 72.0,
                    top: 72.0 + 20.0 * i as f64,
                    font_size: 11.0,
                    text: text.to_string(),
                });
            }
            page
        })
        .collect();
    let spec = DocSpec {
        pages,
        info: InfoSpec {
            title: Some("Notes".into()),
            ..Default::default()
        },
    };
    let path = dir.join(name);
    synth::write_pdf(&spec, &path).unwrap();
    path
}

fn sample(dir: &Path) -> (String, synth::Manifest) {
    let path = dir.join("sample.pdf");
    let manifest = synth::write_sample(&path).unwrap();
    (path.to_string_lossy().into_owned(), manifest)
}

#[test]
fn pages_prints_the_count() {
    let dir = tempfile::tempdir().unwrap();
    let doc = text_doc(dir.path(), "two.pdf", &[&["one"], &["two"]]);
    let out = tabex(&["pages", doc.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "2\n");
}

#[test]
fn text_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let doc = text_doc(dir.path(), "two.pdf", &[&["one", "more"], &["two"]]);
    let doc = doc.to_str().unwrap();
    assert_eq!(stdout(&tabex(&["text", doc])), "one\nmore\n\x0ctwo\n");
    assert_eq!(stdout(&tabex(&["text", doc, "--pages", "2"])), "two\n");

    let meta: serde_json::Value = serde_json::from_slice(&tabex(&["meta", doc]).stdout).unwrap();
    assert_eq!(meta["title"], "Notes");
    assert_eq!(meta["n_pages"], 2);
}

#[test]
fn blank_document_has_no_tables() {
    let dir = tempfile::tempdir().unwrap();
    let blank = dir.path().join("blank.pdf");
    synth::write_pdf(
        &DocSpec {
            pages: vec![PageSpec::new(PageDims::LETTER)],
            ..Default::default()
        },
        &blank,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = tabex(&[
        "extract",
        blank.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    assert!(!out_dir.exists() || std::fs::read_dir(&out_dir).unwrap().next().is_none());
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let (src, _) = sample(dir.path());
    let cases: &[&[&str]] = &[
        &["extract", &src, "--area", "10,10,100,100"],
        &["extract", &src, "--pages", "2-1"],
        &["extract", &src, "--pages", "9"],
        &["extract", &src, "--method", "magic"],
        &["extract", &src, "--format", "xml"],
        &["extract", &src, "--no-guess", "--area", "10,10"],
        &[
            "extract",
            &src,
            "--no-guess",
            "--pages",
            "1",
            "--area",
            "1,1,5,5",
            "--area",
            "1,1,6,6",
            "--area",
            "1,1,7,7",
        ],
        &["extract"],
        &["frobnicate"],
        &["pages", &src, "--bogus"],
    ];
    for args in cases {
        let out = tabex(args);
        assert_eq!(
            out.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn help_succeeds() {
    let out = tabex(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("extract"));
}

#[test]
fn io_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let not_pdf = dir.path().join("notes.pdf");
    std::fs::write(&not_pdf, "plain text").unwrap();
    for args in [
        vec!["pages", "/no/such/file.pdf"],
        vec!["extract", not_pdf.to_str().unwrap()],
        vec!["meta", "http://127.0.0.1:9/missing.pdf"],
    ] {
        let out = tabex(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn stdout_receives_a_single_table() {
    let dir = tempfile::tempdir().unwrap();
    let (src, manifest) = sample(dir.path());
    let area = manifest.pages[2].tables[0].area;
    let area = format!("{},{},{},{}", area[0], area[1], area[2], area[3]);
    let out = tabex(&[
        "extract",
        &src,
        "--pages",
        "3",
        "--no-guess",
        "--area",
        &area,
        "--out",
        "-",
    ]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out),
        "len,supp,dose\n4.2,VC,0.5\n11.5,VC,0.5\n7.3,VC,0.5\n5.8,VC,0.5\n6.4,VC,0.5\n"
    );
    let tsv = tabex(&[
        "extract",
        &src,
        "--pages",
        "3",
        "--format",
        "tsv",
        "--no-col-names",
        "--out",
        "-",
    ]);
    assert!(stdout(&tsv).starts_with("X1\tX2\tX3\nlen\tsupp\tdose\n4.2\tVC\t0.5\n"));
}

#[test]
fn output_files_are_named_by_page_and_index() {
    let dir = tempfile::tempdir().unwrap();
    let (src, _) = sample(dir.path());
    let out_dir = dir.path().join("tables");
    let out = tabex(&[
        "extract",
        &src,
        "--pages",
        "2-3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let mut names: Vec<String> = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["sample-p2-t1.csv", "sample-p2-t2.csv", "sample-p3-t1.csv"]
    );
    assert_eq!(stdout(&out).lines().count(), 3);
}

#[test]
fn one_area_applies_to_every_selected_page() {
    let dir = tempfile::tempdir().unwrap();
    let (src, _) = sample(dir.path());
    let out_dir = dir.path().join("tables");
    let out = tabex(&[
        "extract",
        &src,
        "--pages",
        "1,3",
        "--no-guess",
        "--area",
        "0,0,792,612",
        "--format",
        "json",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out_dir.join("sample-p1-t1.json").exists());
    assert!(out_dir.join("sample-p3-t1.json").exists());
}

#[test]
fn merge_and_split() {
    let dir = tempfile::tempdir().unwrap();
    let a = text_doc(dir.path(), "a.pdf", &[&["alpha"]]);
    let b = text_doc(dir.path(), "b.pdf", &[&["beta"], &["gamma"]]);
    let merged = dir.path().join("ab.pdf");
    let out = tabex(&[
        "merge",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--out",
        merged.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&tabex(&["pages", merged.to_str().unwrap()])), "3\n");
    assert_eq!(
        stdout(&tabex(&["text", merged.to_str().unwrap(), "--pages", "3"])),
        "gamma\n"
    );

    let parts = dir.path().join("parts");
    let out = tabex(&[
        "split",
        merged.to_str().unwrap(),
        "--out",
        parts.to_str().unwrap(),
    ]);
    assert_eq!(stdout(&out).lines().count(), 3);
    assert!(parts.join("ab-2.pdf").exists());
}
