//! Maps JSON-pointer paths of an already valid document to source lines.

use std::collections::BTreeMap;

pub struct LineIndex {
    lines: BTreeMap<String, usize>,
}

impl LineIndex {
    /// Builds the index; malformed input yields a partial map.
    pub fn new(text: &str) -> Self {
        let mut w = Walker { b: text.as_bytes(), i: 0, line: 1, lines: BTreeMap::new() };
        w.value(String::new());
        Self { lines: w.lines }
    }

    /// Line of `pointer`, or of its nearest ancestor that exists in the text.
    pub fn line(&self, pointer: &str) -> usize {
        let mut p = pointer;
        loop {
            if let Some(l) = self.lines.get(p) {
                return *l;
            }
            match p.rfind('/') {
                Some(cut) => p = &p[..cut],
                None => return 1,
            }
        }
    }
}

pub fn escape_token(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

struct Walker<'a> {
    b: &'a [u8],
    i: usize,
    line: usize,
    lines: BTreeMap<String, usize>,
}

impl Walker<'_> {
    fn peek(&self) -> Option<u8> {
        self.b.get(self.i).copied()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            match c {
                b'\n' => self.line += 1,
                b' ' | b'\t' | b'\r' => {}
                _ => break,
            }
            self.i += 1;
        }
    }

    fn value(&mut self, path: String) {
        self.skip_ws();
        self.lines.entry(path.clone()).or_insert(self.line);
        match self.peek() {
            Some(b'{') => self.object(path),
            Some(b'[') => self.array(path),
            Some(b'"') => {
                self.string();
            }
            Some(_) => {
                while let Some(c) = self.peek() {
                    if matches!(c, b',' | b'}' | b']') || c.is_ascii_whitespace() {
                        break;
                    }
                    self.i += 1;
                }
            }
            None => {}
        }
    }

    fn object(&mut self, path: String) {
        self.i += 1;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'}') | None => {
                    self.i += 1;
                    return;
                }
                Some(b',') => self.i += 1,
                Some(b'"') => {
                    let key_line = self.line;
                    let key = self.string();
                    let child = format!("{path}/{}", escape_token(&key));
                    self.lines.insert(child.clone(), key_line);
                    self.skip_ws();
                    if self.peek() == Some(b':') {
                        self.i += 1;
                    }
                    self.value(child);
                }
                Some(_) => return,
            }
        }
    }

    fn array(&mut self, path: String) {
        self.i += 1;
        let mut index = 0;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b']') | None => {
                    self.i += 1;
                    return;
                }
                Some(b',') => self.i += 1,
                Some(_) => {
                    self.value(format!("{path}/{index}"));
                    index += 1;
                }
            }
        }
    }

    fn string(&mut self) -> String {
        let start = self.i;
        self.i += 1;
        while let Some(c) = self.peek() {
            self.i += 1;
            match c {
                b'\\' => self.i += 1,
                b'"' => break,
                _ => {}
            }
        }
        let raw = &self.b[start..self.i.min(self.b.len())];
        serde_json::from_slice::<String>(raw).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pointers_to_lines() {
        let text = "{\n  \"command\": \"bentguide\",\n  \"spec\": {\n    \"inner_radius\": 0.5,\n    \"a/b\": [1,\n 2]\n  }\n}\n";
        let idx = LineIndex::new(text);
        assert_eq!(idx.line("/command"), 2);
        assert_eq!(idx.line("/spec"), 3);
        assert_eq!(idx.line("/spec/inner_radius"), 4);
        assert_eq!(idx.line("/spec/a~1b/1"), 6);
        assert_eq!(idx.line("/spec/missing"), 3);
        assert_eq!(idx.line("/nothing"), 1);
    }
}
