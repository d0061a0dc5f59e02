use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};

use lopdf::{EncryptionState, EncryptionVersion, Object, Permissions, StringFormat};
use tabex::synth::{self, DocSpec, InfoSpec, PageSpec, TextLine};
use tabex::{
    extract_tables, merge_pdfs, BasicRenderer, Document, Error, ExtractionOptions, PageDims,
    PageRect, PageRenderer,
};

fn text_page(dims: PageDims, lines: &[&str]) -> PageSpec {
    let mut page = PageSpec::new(dims);
    for (i, text) in lines.iter().enumerate() {
        page.lines.push(TextLine {
            left: 72.0,
            top: 72.0 + 20.0 * i as f64,
            font_size: 11.0,
            text: text.to_string(),
        });
    }
    page
}

fn two_pages(dir: &Path) -> PathBuf {
    let spec = DocSpec {
        pages: vec![
            text_page(PageDims::LETTER, &["Hello world", "second line"]),
            text_page(PageDims::A4, &["Page two (A4)"]),
        ],
        info: InfoSpec {
            title: Some("Two pages".into()),
            author: Some("Ada".into()),
            created: Some("D:20240131120530+02'00'".into()),
            ..Default::default()
        },
    };
    let path = dir.join("two.pdf");
    synth::write_pdf(&spec, &path).unwrap();
    path
}

#[test]
fn page_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let doc = Document::open_path(&two_pages(dir.path())).unwrap();
    assert_eq!(doc.n_pages(), 2);
    let dims = doc.page_dims(None).unwrap();
    assert_eq!((dims[0].width, dims[0].height), (612.0, 792.0));
    assert!((dims[1].width - 595.28).abs() <= 0.01);
    assert!((dims[1].height - 841.89).abs() <= 0.01);
    assert!(matches!(
        doc.page_dims(Some(&[3])),
        Err(Error::PageOutOfRange {
            page: 3,
            n_pages: 2
        })
    ));
}

#[test]
fn text_in_reading_order() {
    let dir = tempfile::tempdir().unwrap();
    let doc = Document::open_path(&two_pages(dir.path())).unwrap();
    let text = doc.extract_text(None, None).unwrap();
    assert_eq!(text, ["Hello world\nsecond line", "Page two (A4)"]);

    let top = PageRect::new(60.0, 0.0, 90.0, 612.0).unwrap();
    let only_first = doc.extract_text(Some(&[1]), Some(&[top])).unwrap();
    assert_eq!(only_first, ["Hello world"]);
    assert!(doc.extract_text(Some(&[1, 2]), Some(&[top])).is_err());
}

#[test]
fn metadata_fields() {
    let dir = tempfile::tempdir().unwrap();
    let doc = Document::open_path(&two_pages(dir.path())).unwrap();
    let meta = doc.metadata();
    assert_eq!(meta.title.as_deref(), Some("Two pages"));
    assert_eq!(meta.author.as_deref(), Some("Ada"));
    assert_eq!(meta.n_pages, 2);
    assert_eq!(
        meta.created.unwrap().to_rfc3339(),
        "2024-01-31T12:05:30+02:00"
    );
    assert!(meta.modified.is_none());
}

#[test]
fn split_then_merge_preserves_pages() {
    let dir = tempfile::tempdir().unwrap();
    let src = two_pages(dir.path());
    let doc = Document::open_path(&src).unwrap();
    let parts = doc.split(&dir.path().join("parts")).unwrap();
    assert_eq!(parts.len(), 2);
    assert!(parts[0].ends_with("two-1.pdf"));
    assert!(parts[1].ends_with("two-2.pdf"));
    for (i, part) in parts.iter().enumerate() {
        let single = Document::open_path(part).unwrap();
        assert_eq!(single.n_pages(), 1);
        assert_eq!(
            single.extract_text(None, None).unwrap()[0],
            doc.extract_text(Some(&[i + 1]), None).unwrap()[0]
        );
    }
    let merged = merge_pdfs(&parts, &dir.path().join("out/merged.pdf")).unwrap();
    assert_eq!(merged.n_pages(), 2);
    assert_eq!(
        merged.extract_text(None, None).unwrap(),
        doc.extract_text(None, None).unwrap()
    );
    assert_eq!(
        merged.page_dims(None).unwrap(),
        doc.page_dims(None).unwrap()
    );
    assert_eq!(merged.metadata().title.as_deref(), Some("Two pages"));
}

#[test]
fn merge_needs_sources() {
    let dir = tempfile::tempdir().unwrap();
    assert!(merge_pdfs(&[], &dir.path().join("x.pdf")).is_err());
}

#[test]
fn thumbnails_scale_with_dpi() {
    let dir = tempfile::tempdir().unwrap();
    let doc = Document::open_path(&two_pages(dir.path())).unwrap();
    for dpi in [36.0, 72.0, 144.0, 300.0] {
        let out = dir.path().join(format!("thumbs-{dpi}"));
        let files = doc.make_thumbnails(None, dpi, &out).unwrap();
        assert_eq!(files.len(), 2);
        assert!(files[0].ends_with("two-1.png"));
        for (file, dims) in files.iter().zip(doc.page_dims(None).unwrap()) {
            let img = image::open(file).unwrap();
            let want = (
                (dims.width * dpi / 72.0).ceil() as u32,
                (dims.height * dpi / 72.0).ceil() as u32,
            );
            assert_eq!((img.width(), img.height()), want, "dpi {dpi}");
        }
    }
    assert!(doc.make_thumbnails(None, 0.0, dir.path()).is_err());
}

#[test]
fn renderer_draws_text() {
    let dir = tempfile::tempdir().unwrap();
    let doc = Document::open_path(&two_pages(dir.path())).unwrap();
    let img = BasicRenderer.render(&doc.read_page_content(1).unwrap(), 72.0);
    let dark = img.pixels().filter(|p| p.0[0] < 128).count();
    assert!(dark > 50, "expected glyph ink, found {dark} dark pixels");
}

/// Serves `body` to each of `n` connections, then stops.
fn serve(body: Vec<u8>, n: usize) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        for stream in listener.incoming().take(n) {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            while reader.read_line(&mut line).unwrap() > 0 && line != "\r\n" {
                line.clear();
            }
            let head = format!(
                "HTTP/1.1 200 OK\r\nContent-Type: application/pdf\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                body.len()
            );
            stream.write_all(head.as_bytes()).unwrap();
            stream.write_all(&body).unwrap();
        }
    });
    format!("http://{addr}/files/remote-sample.pdf")
}

#[test]
fn url_source_matches_local_file() {
    let dir = tempfile::tempdir().unwrap();
    let local = dir.path().join("sample.pdf");
    synth::write_sample(&local).unwrap();
    let url = serve(std::fs::read(&local).unwrap(), 1);

    let remote = Document::open(&url, None).unwrap();
    let download_dir = tabex::remote::download_dir().unwrap();
    assert!(remote.local_path().starts_with(&download_dir));
    assert!(
        download_dir.starts_with(std::env::temp_dir())
            || std::env::var_os(tabex::remote::DOWNLOAD_DIR_ENV).is_some()
    );
    assert_eq!(remote.stem(), "remote-sample");

    let local_doc = Document::open_path(&local).unwrap();
    let options = ExtractionOptions::default();
    assert_eq!(
        extract_tables(&remote, &options).unwrap(),
        extract_tables(&local_doc, &options).unwrap()
    );
}

fn encrypted(dir: &Path) -> PathBuf {
    let spec = DocSpec {
        pages: vec![text_page(PageDims::LETTER, &["top secret"])],
        ..Default::default()
    };
    let (mut doc, _) = synth::build(&spec).unwrap();
    let id = Object::String(vec![7u8; 16], StringFormat::Literal);
    doc.trailer.set("ID", Object::Array(vec![id.clone(), id]));
    let version = EncryptionVersion::V2 {
        document: &doc,
        owner_password: "owner",
        user_password: "secret",
        key_length: 128,
        permissions: Permissions::all(),
    };
    let state = EncryptionState::try_from(version).unwrap();
    doc.encrypt(&state).unwrap();
    let path = dir.join("locked.pdf");
    doc.save(&path).unwrap();
    path
}

#[test]
fn encrypted_documents_need_the_password() {
    let dir = tempfile::tempdir().unwrap();
    let path = encrypted(dir.path());
    let source = path.to_string_lossy();
    assert!(matches!(
        Document::open(&source, None),
        Err(Error::PasswordRequired)
    ));
    assert!(matches!(
        Document::open(&source, Some("nope")),
        Err(Error::WrongPassword)
    ));
    let doc = Document::open(&source, Some("secret")).unwrap();
    assert_eq!(doc.extract_text(None, None).unwrap(), ["top secret"]);
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(matches!(
        Document::open("/definitely/not/here.pdf", None),
        Err(Error::Io(_))
    ));
}
