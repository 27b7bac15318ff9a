//! Hand-annotated wikitext fixtures measured with the shipped lexicons.

use std::collections::BTreeMap;

use citequal::features::{features_of, LanguageLexicon};
use citequal::PageId;
use serde::Deserialize;

use crate::{ensure, fixture_dir, workspace_config, Outcome};

#[derive(Deserialize)]
struct Annotations {
    fixture: Vec<Annotation>,
}

#[derive(Deserialize)]
struct Annotation {
    file: String,
    language: String,
    note: String,
    length: u64,
    references: u64,
    ref_density: f64,
    images: u64,
    sections: u64,
    qft: u64,
}

pub fn run() -> Outcome {
    let dir = fixture_dir("wikitext");
    let text = std::fs::read_to_string(dir.join("annotations.toml")).map_err(|e| e.to_string())?;
    let annotations: Annotations = toml::from_str(&text).map_err(|e| e.to_string())?;
    ensure!(annotations.fixture.len() >= 20, "only {} fixtures", annotations.fixture.len());

    let mut lexicons = BTreeMap::new();
    let mut failures = Vec::new();
    for a in &annotations.fixture {
        if !lexicons.contains_key(&a.language) {
            let path = workspace_config(&format!("lexicons/{}.toml", a.language));
            let lex = LanguageLexicon::load(&path).map_err(|e| e.to_string())?;
            lexicons.insert(a.language.clone(), lex);
        }
        let wikitext = std::fs::read_to_string(dir.join(&a.file)).map_err(|e| format!("{}: {e}", a.file))?;
        let got = features_of(PageId(1), &wikitext, &lexicons[&a.language]);
        let want = (a.length, a.references, a.images, a.sections, a.qft);
        let have = (got.length, got.references, got.images, got.sections, got.qft);
        // the annotation is the shortest decimal of refs * 1000 / length
        if have != want || (got.ref_density - a.ref_density).abs() > 1e-12 {
            failures.push(format!(
                "{} ({}): (length, refs, images, sections, qft) {have:?} expected {want:?}, ref_density {} expected {}",
                a.file, a.note, got.ref_density, a.ref_density
            ));
        }
    }
    ensure!(failures.is_empty(), "{} of {} fixtures wrong: {}", failures.len(), annotations.fixture.len(), failures.join("; "));
    Ok(format!("{} fixtures exact", annotations.fixture.len()))
}
