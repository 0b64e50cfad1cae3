//! Best-effort HTML front-end: converts article markup into a [`RawArticle`]
//! payload. Heading tags delimit sections; figures are taken from the
//! section they are nested in.

use regex::Regex;
use std::sync::OnceLock;

use crate::corpus::parse::{RawArticle, RawFigure, RawSection};
use crate::error::{Error, Result};

fn re(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("static regex"))
}

static TITLE: OnceLock<Regex> = OnceLock::new();
static HEADING: OnceLock<Regex> = OnceLock::new();
static FIGURE: OnceLock<Regex> = OnceLock::new();
static IMG_SRC: OnceLock<Regex> = OnceLock::new();
static FIGCAPTION: OnceLock<Regex> = OnceLock::new();
static TAG: OnceLock<Regex> = OnceLock::new();

fn strip_tags(html: &str) -> String {
    let no_tags = re(&TAG, r"(?s)<[^>]*>").replace_all(html, " ");
    let decoded = no_tags
        .replace("&amp;", "&")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&nbsp;", " ");
    decoded.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn extract_figures(section_html: &str) -> (String, Vec<RawFigure>) {
    let figure_re = re(
        &FIGURE,
        r"(?s)<figure[^>]*>.*?</figure>|<img[^>]*/?>",
    );
    let img_src = re(&IMG_SRC, r#"(?s)<img[^>]*\bsrc\s*=\s*["']([^"']+)["']"#);
    let figcaption = re(&FIGCAPTION, r"(?s)<figcaption[^>]*>(.*?)</figcaption>");

    let mut figures = Vec::new();
    let remaining = figure_re.replace_all(section_html, |caps: &regex::Captures| {
        let block = caps.get(0).map(|m| m.as_str()).unwrap_or("");
        let src = img_src
            .captures(block)
            .and_then(|c| c.get(1))
            .map(|m| m.as_str().to_string());
        let caption = figcaption
            .captures(block)
            .and_then(|c| c.get(1))
            .map(|m| strip_tags(m.as_str()))
            .unwrap_or_default();
        if let Some(src) = src {
            figures.push(RawFigure {
                image_ref: src,
                caption,
            });
        }
        String::from(" ")
    });
    (remaining.into_owned(), figures)
}

/// Parses article HTML into the canonical payload. `id` becomes the article
/// id; the `<title>` or first `<h1>` becomes the title.
pub fn article_from_html(id: &str, html: &str) -> Result<RawArticle> {
    let title_re = re(&TITLE, r"(?s)<title[^>]*>(.*?)</title>|<h1[^>]*>(.*?)</h1>");
    let title = title_re
        .captures(html)
        .and_then(|c| c.get(1).or_else(|| c.get(2)))
        .map(|m| strip_tags(m.as_str()))
        .unwrap_or_default();
    if title.is_empty() {
        return Err(Error::MalformedPayload(format!(
            "article {id}: no <title> or <h1> found"
        )));
    }

    // Split the body on section headings (h2/h3); text before the first
    // heading becomes the lead section.
    let heading_re = re(&HEADING, r"(?s)<h[23][^>]*>(.*?)</h[23]>");
    let body = html;

    let mut boundaries: Vec<(usize, usize, String)> = Vec::new();
    for caps in heading_re.captures_iter(body) {
        let whole = caps.get(0).unwrap();
        let text = strip_tags(caps.get(1).map(|m| m.as_str()).unwrap_or(""));
        boundaries.push((whole.start(), whole.end(), text));
    }

    let mut chunks: Vec<(String, &str)> = Vec::new();
    if boundaries.is_empty() {
        chunks.push((String::new(), body));
    } else {
        if boundaries[0].0 > 0 {
            chunks.push((String::new(), &body[..boundaries[0].0]));
        }
        for (i, (_, end, heading)) in boundaries.iter().enumerate() {
            let next_start = boundaries
                .get(i + 1)
                .map(|b| b.0)
                .unwrap_or(body.len());
            chunks.push((heading.clone(), &body[*end..next_start]));
        }
    }

    let mut sections = Vec::new();
    for (heading, chunk) in chunks {
        let (rest, figures) = extract_figures(chunk);
        let text = strip_tags(&rest);
        if text.is_empty() && figures.is_empty() {
            continue;
        }
        sections.push(RawSection {
            heading,
            // A figure-only section still needs a sentence to anchor it.
            text: if text.is_empty() {
                String::from("(figure)")
            } else {
                text
            },
            figures,
        });
    }
    if sections.is_empty() {
        return Err(Error::MalformedPayload(format!(
            "article {id}: no sections found"
        )));
    }

    Ok(RawArticle {
        id: id.to_string(),
        title,
        sections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_document;

    const PAGE: &str = r#"
        <html><head><title>Tide Pools</title></head><body>
        <p>Tide pools form on rocky shores. They hold trapped seawater.</p>
        <h2>Ecology</h2>
        <p>Anemones anchor to the rock. Crabs move between pools.</p>
        <figure><img src="imgs/anemone.png"><figcaption>A green anemone</figcaption></figure>
        <h2>Hazards</h2>
        <p>Waves strike without warning. Visitors should watch the sea.</p>
        <img src="imgs/waves.png" />
        </body></html>"#;

    #[test]
    fn headings_delimit_sections() {
        let raw = article_from_html("tp", PAGE).unwrap();
        assert_eq!(raw.title, "Tide Pools");
        assert_eq!(raw.sections.len(), 3);
        assert_eq!(raw.sections[1].heading, "Ecology");
        assert_eq!(raw.sections[1].figures.len(), 1);
        assert_eq!(raw.sections[1].figures[0].image_ref, "imgs/anemone.png");
        assert_eq!(raw.sections[1].figures[0].caption, "A green anemone");
        // Bare <img> without figcaption keeps an empty caption.
        assert_eq!(raw.sections[2].figures[0].caption, "");
    }

    #[test]
    fn html_payload_parses_into_document() {
        let raw = article_from_html("tp", PAGE).unwrap();
        let doc = parse_document(&raw).unwrap();
        assert_eq!(doc.figures.len(), 2);
        assert_eq!(doc.figures[0].gt_section_index, 1);
        assert_eq!(doc.figures[1].gt_section_index, 2);
    }

    #[test]
    fn missing_title_is_malformed() {
        assert!(article_from_html("x", "<p>No title here.</p>").is_err());
    }
}
