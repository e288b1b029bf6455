//! Tolerant start-tag scanner. Not a parser: it walks `<name attr=value>`
//! patterns and never fails, which is what broken phishing pages need.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tag {
    /// Lowercased tag name.
    pub name: String,
    /// Lowercased attribute names with raw values.
    pub attrs: Vec<(String, String)>,
}

impl Tag {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }
}

pub fn start_tags(html: &str) -> Tags<'_> {
    Tags {
        src: html.as_bytes(),
        text: html,
        pos: 0,
    }
}

pub struct Tags<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
}

impl Tags<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn take_while(&mut self, pred: impl Fn(u8) -> bool) -> &str {
        let start = self.pos;
        while self.pos < self.src.len() && pred(self.src[self.pos]) {
            self.pos += 1;
        }
        &self.text[start..self.pos]
    }
}

impl Iterator for Tags<'_> {
    type Item = Tag;

    fn next(&mut self) -> Option<Tag> {
        loop {
            let rel = self.text[self.pos..].find('<')?;
            self.pos += rel + 1;

            if self.text[self.pos..].starts_with("!--") {
                match self.text[self.pos..].find("-->") {
                    Some(end) => self.pos += end + 3,
                    None => self.pos = self.src.len(),
                }
                continue;
            }
            if self.pos >= self.src.len() || !self.src[self.pos].is_ascii_alphabetic() {
                continue;
            }

            let name = self
                .take_while(|b| b.is_ascii_alphanumeric() || b == b'-')
                .to_ascii_lowercase();
            let mut attrs = Vec::new();
            loop {
                self.skip_ws();
                if self.pos >= self.src.len() {
                    break;
                }
                match self.src[self.pos] {
                    b'>' => {
                        self.pos += 1;
                        break;
                    }
                    b'/' => {
                        self.pos += 1;
                        continue;
                    }
                    // A stray '<' means the tag never closed; restart there.
                    b'<' => break,
                    _ => {}
                }
                let key = self
                    .take_while(|b| {
                        !b.is_ascii_whitespace() && !matches!(b, b'=' | b'>' | b'/' | b'<')
                    })
                    .to_ascii_lowercase();
                if key.is_empty() {
                    // Unparseable byte: skip it.
                    self.pos += 1;
                    continue;
                }
                self.skip_ws();
                let mut value = String::new();
                if self.pos < self.src.len() && self.src[self.pos] == b'=' {
                    self.pos += 1;
                    self.skip_ws();
                    if self.pos < self.src.len() && matches!(self.src[self.pos], b'"' | b'\'') {
                        let quote = self.src[self.pos];
                        self.pos += 1;
                        value = self.take_while(|b| b != quote).to_string();
                        if self.pos < self.src.len() {
                            self.pos += 1;
                        }
                    } else {
                        value = self
                            .take_while(|b| !b.is_ascii_whitespace() && b != b'>')
                            .to_string();
                    }
                }
                attrs.push((key, value));
            }
            return Some(Tag { name, attrs });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scans_attributes_in_all_quoting_styles() {
        let tags: Vec<Tag> =
            start_tags(r#"<A HREF="/x" data-y='1' z=2 checked><img src=/i.png/></a>"#).collect();
        assert_eq!(tags.len(), 2);
        assert_eq!(tags[0].name, "a");
        assert_eq!(tags[0].attr("href"), Some("/x"));
        assert_eq!(tags[0].attr("data-y"), Some("1"));
        assert_eq!(tags[0].attr("z"), Some("2"));
        assert_eq!(tags[0].attr("checked"), Some(""));
        assert_eq!(tags[1].name, "img");
        assert_eq!(tags[1].attr("src"), Some("/i.png/"));
    }

    #[test]
    fn skips_comments_closing_tags_and_garbage() {
        let names: Vec<String> = start_tags("<!-- <img src=a> --></p> < b <p>text<br/>")
            .map(|t| t.name)
            .collect();
        assert_eq!(names, ["p", "br"]);
    }

    #[test]
    fn unterminated_tag_does_not_swallow_the_next() {
        let tags: Vec<Tag> = start_tags(r#"<a href="x" <img src="y">"#).collect();
        assert_eq!(tags.len(), 2);
        assert_eq!(tags[1].attr("src"), Some("y"));
        assert_eq!(start_tags("<a href=\"never closed").count(), 1);
    }
}
