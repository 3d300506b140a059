use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::cli::config::RunConfig;
use crate::cli::csv::read_csv;
use crate::error::{Error, Result};

fn html_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Index page over the artifacts in the output directory: every CSV's
/// provenance plus links to the SVGs produced alongside it, grouped by
/// command. Corrupt CSVs are listed as warnings instead of aborting.
pub fn cmd_report(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = PathBuf::from(&config.output_dir);
    let mut csvs: Vec<PathBuf> = Vec::new();
    let mut svgs: Vec<PathBuf> = Vec::new();
    if dir.is_dir() {
        let entries = std::fs::read_dir(&dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        for entry in entries {
            let path = entry.map_err(|e| Error::io(dir.display().to_string(), e))?.path();
            match path.extension().and_then(|e| e.to_str()) {
                Some("csv") => csvs.push(path),
                Some("svg") => svgs.push(path),
                _ => {}
            }
        }
    }
    csvs.sort();
    svgs.sort();

    let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut warnings: Vec<String> = Vec::new();
    for path in &csvs {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("").to_string();
        match read_csv(path) {
            Ok(content) => {
                let command = content
                    .comments
                    .iter()
                    .find_map(|c| c.strip_prefix("command: "))
                    .unwrap_or("unknown")
                    .to_string();
                let config_line = content
                    .comments
                    .iter()
                    .find_map(|c| c.strip_prefix("config: "))
                    .unwrap_or("(no embedded config)")
                    .to_string();
                let mut block = format!(
                    "<h3>{}</h3>\n<p>{} rows. Config: <code>{}</code></p>\n",
                    html_escape(&stem),
                    content.rows.len(),
                    html_escape(&config_line)
                );
                for svg in svgs.iter().filter(|s| {
                    s.file_stem()
                        .and_then(|n| n.to_str())
                        .is_some_and(|n| n.starts_with(&stem))
                }) {
                    let name = svg.file_name().and_then(|n| n.to_str()).unwrap_or("");
                    block.push_str(&format!(
                        "<div><a href=\"{0}\">{0}</a><br/><img src=\"{0}\" width=\"600\"/></div>\n",
                        html_escape(name)
                    ));
                }
                groups.entry(command).or_default().push(block);
            }
            Err(e) => warnings.push(format!("{}: {e}", path.display())),
        }
    }

    let mut html = String::from(
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"/><title>snnlab report</title></head><body>\n<h1>snnlab report</h1>\n",
    );
    if groups.is_empty() {
        html.push_str("<p>No artifacts found.</p>\n");
        eprintln!(
            "warning: no CSV artifacts in {}; report is empty",
            dir.display()
        );
    }
    for (command, blocks) in &groups {
        html.push_str(&format!("<h2>{}</h2>\n", html_escape(command)));
        for b in blocks {
            html.push_str(b);
        }
    }
    if !warnings.is_empty() {
        html.push_str("<h2>warnings</h2>\n<ul>\n");
        for w in &warnings {
            html.push_str(&format!("<li>{}</li>\n", html_escape(w)));
            eprintln!("warning: {w}");
        }
        html.push_str("</ul>\n");
    }
    html.push_str("</body></html>\n");

    std::fs::create_dir_all(&dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let out = dir.join("report.html");
    std::fs::write(&out, html).map_err(|e| Error::io(out.display().to_string(), e))?;
    Ok(vec![out])
}
