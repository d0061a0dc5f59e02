use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tabex::{
    extract_tables, merge_pdfs, remote, write_table, Document, Error, ExtractionOptions, Format,
    MethodChoice, PageRect, RawTable, TypedTable,
};

/// Extract tables and text from PDF files.
#[derive(Parser, Debug)]
#[command(name = "tabex", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract tables to CSV, TSV or JSON files.
    Extract(ExtractArgs),
    /// Print the text of each page in reading order.
    Text(PagedArgs),
    /// Print document metadata as JSON.
    Meta(SourceArgs),
    /// Print the number of pages.
    Pages(SourceArgs),
    /// Print page width and height in pt, one page per line.
    Dims(PagedArgs),
    /// Render pages to PNG files.
    Thumbnails(ThumbnailArgs),
    /// Write every page to its own PDF.
    Split(SplitArgs),
    /// Concatenate PDFs into one file.
    Merge(MergeArgs),
    /// Serve the interactive area picker.
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Path or http(s) URL of the PDF.
    src: String,
    /// Password for encrypted documents.
    #[arg(long)]
    password: Option<String>,
}

#[derive(Args, Debug)]
struct PagedArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Pages such as `1,3-5` (default: all).
    #[arg(long)]
    pages: Option<String>,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Pages such as `2`, `1,3` or `2-4`. May be repeated, pairing each with an `--area`.
    #[arg(long)]
    pages: Vec<String>,
    /// Area as top,left,bottom,right in pt. Repeatable; requires --no-guess.
    #[arg(long, allow_hyphen_values = true)]
    area: Vec<String>,
    /// Column boundaries as x positions in pt (stream only).
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<f64>>,
    /// lattice, stream or decide.
    #[arg(long, default_value = "decide")]
    method: String,
    /// Do not detect table areas; use --area or the whole page.
    #[arg(long)]
    no_guess: bool,
    /// Treat the first row as data and name columns X1..Xn.
    #[arg(long)]
    no_col_names: bool,
    /// csv, tsv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output directory, or `-` for standard output.
    #[arg(long, default_value = ".")]
    out: String,
}

#[derive(Args, Debug)]
struct ThumbnailArgs {
    #[command(flatten)]
    paged: PagedArgs,
    #[arg(long, default_value_t = 72.0)]
    dpi: f64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SplitArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MergeArgs {
    /// Input PDFs in order.
    #[arg(required = true)]
    srcs: Vec<PathBuf>,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Address to bind.
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
}

/// A failure with its exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    NoTables,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Io(_) => 2,
            Failure::NoTables => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidRect(_)
            | Error::InvalidOptions(_)
            | Error::PageOutOfRange { .. }
            | Error::AreaOutsidePage { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Io(e.to_string()),
        }
    }
}

fn io_failure(context: &str, e: std::io::Error) -> Failure {
    Failure::Io(format!("{context}: {e}"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = run(cli);
    remote::cleanup();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Io(msg) => eprintln!("error: {msg}"),
                Failure::NoTables => eprintln!("no tables found"),
            }
            ExitCode::from(failure.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Extract(args) => extract(args),
        Command::Text(args) => {
            let doc = open(&args.source)?;
            let pages = parse_pages_opt(args.pages.as_deref())?;
            let texts = doc.extract_text(pages.as_deref(), None)?;
            let mut out = std::io::stdout().lock();
            for (i, text) in texts.iter().enumerate() {
                if i > 0 {
                    write!(out, "\x0c").map_err(|e| io_failure("stdout", e))?;
                }
                writeln!(out, "{text}").map_err(|e| io_failure("stdout", e))?;
            }
            Ok(())
        }
        Command::Meta(args) => {
            let doc = open(&args)?;
            let json = serde_json::to_string_pretty(&doc.metadata())
                .map_err(|e| Failure::Io(e.to_string()))?;
            println!("{json}");
            Ok(())
        }
        Command::Pages(args) => {
            println!("{}", open(&args)?.n_pages());
            Ok(())
        }
        Command::Dims(args) => {
            let doc = open(&args.source)?;
            let pages = doc.resolve_pages(parse_pages_opt(args.pages.as_deref())?.as_deref())?;
            let dims = doc.page_dims(Some(&pages))?;
            for (page, d) in pages.iter().zip(dims) {
                println!("{page} {} {}", d.width, d.height);
            }
            Ok(())
        }
        Command::Thumbnails(args) => {
            let doc = open(&args.paged.source)?;
            let pages = parse_pages_opt(args.paged.pages.as_deref())?;
            for path in doc.make_thumbnails(pages.as_deref(), args.dpi, &args.out)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Split(args) => {
            for path in open(&args.source)?.split(&args.out)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Merge(args) => {
            let merged = merge_pdfs(&args.srcs, &args.out)?;
            println!("{} ({} pages)", args.out.display(), merged.n_pages());
            Ok(())
        }
        Command::Serve(args) => {
            let doc = open(&args.source)?;
            let addr = SocketAddr::new(args.host, args.port);
            let runtime = tokio::runtime::Runtime::new().map_err(|e| io_failure("runtime", e))?;
            eprintln!("serving {} on http://{addr}", doc.source());
            runtime
                .block_on(tabex_picker::serve(doc, addr))
                .map_err(|e| io_failure(&format!("cannot serve on {addr}"), e))
        }
    }
}

fn open(args: &SourceArgs) -> Result<Document, Failure> {
    Ok(Document::open(&args.src, args.password.as_deref())?)
}

/// Parses `1,3-5` into `[1, 3, 4, 5]`.
fn parse_pages(spec: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::Usage(format!("invalid page list {spec:?} (expected e.g. 1,3-5)"));
    let mut pages = Vec::new();
    for part in spec.split(',').map(str::trim) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                );
                if a == 0 || b < a {
                    return Err(bad());
                }
                pages.extend(a..=b);
            }
            None => {
                let p: usize = part.parse().map_err(|_| bad())?;
                if p == 0 {
                    return Err(bad());
                }
                pages.push(p);
            }
        }
    }
    Ok(pages)
}

fn parse_pages_opt(spec: Option<&str>) -> Result<Option<Vec<usize>>, Failure> {
    spec.map(parse_pages).transpose()
}

fn extract(args: ExtractArgs) -> Result<(), Failure> {
    if !args.area.is_empty() && !args.no_guess {
        return Err(Failure::Usage("--area requires --no-guess".into()));
    }
    let format: Format = args.format.parse()?;
    let method: MethodChoice = args.method.parse()?;
    let areas = args
        .area
        .iter()
        .map(|a| PageRect::parse(a))
        .collect::<Result<Vec<_>, _>>()?;
    let mut pages = Vec::new();
    for spec in &args.pages {
        pages.extend(parse_pages(spec)?);
    }

    let doc = open(&args.source)?;
    let mut pages = if pages.is_empty() { None } else { Some(pages) };
    let areas = match areas.len() {
        0 => None,
        // One area applies to every selected page.
        1 => {
            let all = doc.resolve_pages(pages.as_deref())?;
            let n = all.len();
            pages = Some(all);
            Some(vec![areas[0]; n])
        }
        _ => {
            let n = pages.as_ref().map_or(doc.n_pages(), Vec::len);
            if n != areas.len() {
                return Err(Failure::Usage(format!(
                    "{} areas given for {n} pages; pair each --area with a --pages value",
                    areas.len()
                )));
            }
            Some(areas)
        }
    };
    let options = ExtractionOptions {
        pages,
        area: areas,
        columns: args.columns,
        guess: !args.no_guess,
        method,
        col_names: !args.no_col_names,
    };
    let raw = extract_tables(&doc, &options)?;
    if raw.is_empty() {
        return Err(Failure::NoTables);
    }
    let typed: Vec<(&RawTable, TypedTable)> = raw
        .iter()
        .map(|t| (t, TypedTable::from_raw(t, options.col_names)))
        .collect();

    if args.out == "-" {
        if typed.len() > 1 {
            log::warn!("{} tables found; writing the first to stdout", typed.len());
        }
        let mut out = std::io::stdout().lock();
        out.write_all(&write_table(&typed[0].1, format))
            .map_err(|e| io_failure("stdout", e))?;
        return Ok(());
    }

    let dir = Path::new(&args.out);
    std::fs::create_dir_all(dir).map_err(|e| io_failure(&dir.display().to_string(), e))?;
    let stem = doc.stem();
    let mut index_on_page = 0;
    let mut last_page = 0;
    for (raw, table) in &typed {
        if raw.page != last_page {
            last_page = raw.page;
            index_on_page = 0;
        }
        index_on_page += 1;
        let path = dir.join(format!(
            "{stem}-p{}-t{index_on_page}.{}",
            raw.page,
            format.extension()
        ));
        std::fs::write(&path, write_table(table, format))
            .map_err(|e| io_failure(&path.display().to_string(), e))?;
        println!("{}", path.display());
    }
    Ok(())
}
