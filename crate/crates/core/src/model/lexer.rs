use super::ModelError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Newline,
    /// One of `[ ] ( ) , : + * - / = < > <= >= -> || { }`.
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const PUNCT: [&str; 19] = [
    "->", "||", "<=", ">=", "[", "]", "(", ")", ",", ":", "+", "*", "-", "/", "=", "<", ">", "{", "}",
];

pub fn tokenize(text: &str) -> Result<Vec<Token>, ModelError> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line: line_no,
                    col,
                });
                continue;
            }
            if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                out.push(Token {
                    tok: Tok::Number(chars[start..i].iter().collect()),
                    line: line_no,
                    col,
                });
                continue;
            }
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            match PUNCT.iter().find(|p| rest.starts_with(**p)) {
                Some(p) => {
                    out.push(Token {
                        tok: Tok::Punct(p),
                        line: line_no,
                        col,
                    });
                    i += p.len();
                }
                None => return Err(ModelError::at(line_no, col, format!("unexpected character `{c}`"))),
            }
        }
        out.push(Token {
            tok: Tok::Newline,
            line: line_no,
            col: chars.len() + 1,
        });
    }
    let last = text.lines().count().max(1);
    out.push(Token {
        tok: Tok::Eof,
        line: last,
        col: 1,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_tokens() {
        assert_eq!(
            toks("trans a : i1 -> u rate 2.5 # note"),
            vec![
                Tok::Ident("trans".into()),
                Tok::Ident("a".into()),
                Tok::Punct(":"),
                Tok::Ident("i1".into()),
                Tok::Punct("->"),
                Tok::Ident("u".into()),
                Tok::Ident("rate".into()),
                Tok::Number("2.5".into()),
                Tok::Newline,
                Tok::Eof,
            ]
        );
        assert_eq!(toks("x || y")[1], Tok::Punct("||"));
        assert_eq!(toks("1e-3")[0], Tok::Number("1e-3".into()));
    }

    #[test]
    fn bad_character_has_position() {
        let e = tokenize("kind K\n  places a $").unwrap_err();
        assert_eq!((e.line, e.col), (Some(2), Some(12)));
    }
}
