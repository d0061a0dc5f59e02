//! Page-level document surgery: splitting into single pages and merging documents.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lopdf::{Dictionary, Object, ObjectId};

use super::{inherited_attr, Document};
use crate::error::{Error, Result};

/// Page attributes that may be inherited from the page tree and must be copied
/// onto a page before it is moved into a new tree.
const INHERITABLE: [&[u8]; 4] = [b"Resources", b"MediaBox", b"CropBox", b"Rotate"];

impl Document {
    /// Writes each page to `<out_dir>/<stem>-<page>.pdf`.
    pub fn split(&self, out_dir: &Path) -> Result<Vec<PathBuf>> {
        ensure_dir(out_dir)?;
        let stem = self.stem();
        (1..=self.n_pages())
            .map(|page| {
                let mut out = assemble(&[(self, vec![page])], Some(self))?;
                let path = out_dir.join(format!("{stem}-{page}.pdf"));
                save(&mut out, &path)?;
                Ok(path)
            })
            .collect()
    }
}

/// Concatenates the pages of `sources` in order into `out_path` and opens the result.
pub fn merge_pdfs(sources: &[PathBuf], out_path: &Path) -> Result<Document> {
    if sources.is_empty() {
        return Err(Error::InvalidOptions(
            "merge needs at least one source".into(),
        ));
    }
    let docs = sources
        .iter()
        .map(|p| Document::open_path(p))
        .collect::<Result<Vec<_>>>()?;
    let selection: Vec<(&Document, Vec<usize>)> = docs
        .iter()
        .map(|d| (d, (1..=d.n_pages()).collect()))
        .collect();
    let mut out = assemble(&selection, docs.first())?;
    if let Some(parent) = out_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    save(&mut out, out_path)?;
    Document::open_path(out_path)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Write {
        path: dir.to_path_buf(),
        source,
    })
}

fn save(doc: &mut lopdf::Document, path: &Path) -> Result<()> {
    doc.save(path).map(|_| ()).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Builds a new document holding the selected pages (1-based) of each source, in order.
fn assemble(
    selection: &[(&Document, Vec<usize>)],
    info_from: Option<&Document>,
) -> Result<lopdf::Document> {
    let mut out = lopdf::Document::with_version("1.5");
    let mut next_id: u32 = 1;
    let mut kids = Vec::new();
    let mut remapped_info = None;

    let mut copied: BTreeMap<ObjectId, Object> = BTreeMap::new();
    for (doc, pages) in selection {
        let pdf = doc.pdf();
        let offset = next_id;
        let remap = |id: ObjectId| (id.0 + offset, id.1);
        let page_ids: Vec<ObjectId> = pages
            .iter()
            .map(|&p| doc.page_info(p).map(|i| i.id))
            .collect::<Result<_>>()?;

        for (&id, obj) in &pdf.objects {
            if is_tree_node(obj) {
                continue;
            }
            let mut obj = obj.clone();
            if page_ids.contains(&id) {
                if let Object::Dictionary(dict) = &mut obj {
                    for key in INHERITABLE {
                        if dict.get(key).is_err() {
                            if let Some(v) = inherited_attr(pdf, id, key) {
                                dict.set(key, v.clone());
                            }
                        }
                    }
                }
            }
            remap_refs(&mut obj, offset);
            copied.insert(remap(id), obj);
        }
        kids.extend(page_ids.iter().map(|&id| remap(id)));
        if info_from.is_some_and(|d| std::ptr::eq(d, *doc)) && remapped_info.is_none() {
            remapped_info = pdf
                .trailer
                .get(b"Info")
                .ok()
                .and_then(|o| o.as_reference().ok())
                .map(remap);
        }
        next_id = offset + pdf.max_id + 1;
    }

    let pages_id = (next_id, 0);
    let catalog_id = (next_id + 1, 0);
    for kid in &kids {
        if let Some(Object::Dictionary(dict)) = copied.get_mut(kid) {
            dict.set("Parent", Object::Reference(pages_id));
        }
    }
    out.objects = copied;
    let mut pages = Dictionary::new();
    pages.set("Type", Object::Name(b"Pages".to_vec()));
    pages.set("Count", Object::Integer(kids.len() as i64));
    pages.set(
        "Kids",
        Object::Array(kids.iter().map(|&k| Object::Reference(k)).collect()),
    );
    out.objects.insert(pages_id, Object::Dictionary(pages));
    let mut catalog = Dictionary::new();
    catalog.set("Type", Object::Name(b"Catalog".to_vec()));
    catalog.set("Pages", Object::Reference(pages_id));
    out.objects.insert(catalog_id, Object::Dictionary(catalog));
    out.trailer.set("Root", Object::Reference(catalog_id));
    if let Some(info) = remapped_info.filter(|id| out.objects.contains_key(id)) {
        out.trailer.set("Info", Object::Reference(info));
    }
    out.max_id = next_id + 1;
    out.prune_objects();
    out.renumber_objects();
    Ok(out)
}

fn is_tree_node(obj: &Object) -> bool {
    match obj {
        Object::Dictionary(d) => d.has_type(b"Pages") || d.has_type(b"Catalog"),
        _ => false,
    }
}

fn remap_refs(obj: &mut Object, offset: u32) {
    match obj {
        Object::Reference(id) => id.0 += offset,
        Object::Array(items) => items.iter_mut().for_each(|o| remap_refs(o, offset)),
        Object::Dictionary(dict) => dict.iter_mut().for_each(|(_, o)| remap_refs(o, offset)),
        Object::Stream(stream) => stream
            .dict
            .iter_mut()
            .for_each(|(_, o)| remap_refs(o, offset)),
        _ => {}
    }
}
