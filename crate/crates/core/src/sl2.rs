//! Determinant-one 2x2 matrices, the elementary matrices `U(x)`, `L(x)` and
//! words in them.
//!
//! Words evaluate left to right, so appending a letter is right
//! multiplication, the same action the row calculus in [`crate::reduction`]
//! tracks on first rows.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ring::{parse_raw_element, Cursor, Ring, RingElement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    /// `L(x) = [[1,0],[x,1]]`
    #[serde(rename = "L")]
    Lower,
    /// `U(x) = [[1,x],[0,1]]`
    #[serde(rename = "U")]
    Upper,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Lower => Side::Upper,
            Side::Upper => Side::Lower,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Side::Lower => "L",
            Side::Upper => "U",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ElemLetter {
    pub side: Side,
    pub param: RingElement,
}

impl ElemLetter {
    pub fn lower(param: RingElement) -> Self {
        ElemLetter { side: Side::Lower, param }
    }

    pub fn upper(param: RingElement) -> Self {
        ElemLetter { side: Side::Upper, param }
    }
}

impl fmt::Display for ElemLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.side.tag(), self.param)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ElemWord {
    pub letters: Vec<ElemLetter>,
}

impl ElemWord {
    pub fn new(letters: Vec<ElemLetter>) -> Self {
        ElemWord { letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn starts_lower(&self) -> bool {
        self.letters.first().is_some_and(|l| l.side == Side::Lower)
    }

    /// Letter list as JSON, `[{"side":"L","param":"..."}, ...]`.
    pub fn letters_json(&self) -> Value {
        Value::Array(
            self.letters.iter().map(|l| json!({"side": l.side.tag(), "param": l.param.to_string()})).collect(),
        )
    }

    /// `{"letters":[...]}`
    pub fn to_json(&self) -> Value {
        json!({ "letters": self.letters_json() })
    }
}

impl fmt::Display for ElemWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "]")
    }
}

#[derive(Deserialize)]
struct LetterJson {
    side: Side,
    param: String,
}

#[derive(Deserialize)]
struct WordJson {
    letters: Vec<LetterJson>,
}

/// `[[a, b], [c, d]]` with `ad - bc = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat2 {
    a: RingElement,
    b: RingElement,
    c: RingElement,
    d: RingElement,
}

impl Mat2 {
    pub fn a(&self) -> &RingElement {
        &self.a
    }
    pub fn b(&self) -> &RingElement {
        &self.b
    }
    pub fn c(&self) -> &RingElement {
        &self.c
    }
    pub fn d(&self) -> &RingElement {
        &self.d
    }

    pub fn first_row(&self) -> (&RingElement, &RingElement) {
        (&self.a, &self.b)
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.d.is_one() && self.b.is_zero() && self.c.is_zero()
    }

    /// `Some(letter)` when the matrix is `U(x)` or `L(x)` with `x != 0`.
    pub fn as_elementary(&self) -> Option<ElemLetter> {
        if !self.a.is_one() || !self.d.is_one() {
            return None;
        }
        match (self.b.is_zero(), self.c.is_zero()) {
            (false, true) => Some(ElemLetter::upper(self.b.clone())),
            (true, false) => Some(ElemLetter::lower(self.c.clone())),
            _ => None,
        }
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

impl Ring {
    pub fn det(&self, a: &RingElement, b: &RingElement, c: &RingElement, d: &RingElement) -> RingElement {
        self.sub(&self.mul(a, d), &self.mul(b, c))
    }

    pub fn mat(&self, a: RingElement, b: RingElement, c: RingElement, d: RingElement) -> Result<Mat2> {
        let det = self.det(&a, &b, &c, &d);
        if !det.is_one() {
            return Err(Error::Determinant { det: det.to_string() });
        }
        Ok(Mat2 { a, b, c, d })
    }

    fn mat_unchecked(&self, a: RingElement, b: RingElement, c: RingElement, d: RingElement) -> Mat2 {
        debug_assert!(self.det(&a, &b, &c, &d).is_one(), "determinant drifted from 1");
        Mat2 { a, b, c, d }
    }

    pub fn mat_i64(&self, rows: [[i64; 2]; 2]) -> Result<Mat2> {
        self.mat(self.int(rows[0][0]), self.int(rows[0][1]), self.int(rows[1][0]), self.int(rows[1][1]))
    }

    pub fn identity(&self) -> Mat2 {
        Mat2 { a: self.one(), b: self.zero(), c: self.zero(), d: self.one() }
    }

    pub fn elementary(&self, side: Side, x: RingElement) -> Mat2 {
        match side {
            Side::Upper => Mat2 { a: self.one(), b: x, c: self.zero(), d: self.one() },
            Side::Lower => Mat2 { a: self.one(), b: self.zero(), c: x, d: self.one() },
        }
    }

    pub fn letter_matrix(&self, l: &ElemLetter) -> Mat2 {
        self.elementary(l.side, l.param.clone())
    }

    pub fn mat_mul(&self, p: &Mat2, q: &Mat2) -> Mat2 {
        let a = self.add(&self.mul(&p.a, &q.a), &self.mul(&p.b, &q.c));
        let b = self.add(&self.mul(&p.a, &q.b), &self.mul(&p.b, &q.d));
        let c = self.add(&self.mul(&p.c, &q.a), &self.mul(&p.d, &q.c));
        let d = self.add(&self.mul(&p.c, &q.b), &self.mul(&p.d, &q.d));
        self.mat_unchecked(a, b, c, d)
    }

    pub fn mat_inverse(&self, m: &Mat2) -> Mat2 {
        self.mat_unchecked(m.d.clone(), self.neg(&m.b), self.neg(&m.c), m.a.clone())
    }

    /// `m * L(x)` or `m * U(x)` as a column operation.
    pub fn apply_letter(&self, m: &Mat2, side: Side, x: &RingElement) -> Mat2 {
        if x.is_zero() {
            return m.clone();
        }
        match side {
            Side::Lower => self.mat_unchecked(
                self.add(&m.a, &self.mul(&m.b, x)),
                m.b.clone(),
                self.add(&m.c, &self.mul(&m.d, x)),
                m.d.clone(),
            ),
            Side::Upper => self.mat_unchecked(
                m.a.clone(),
                self.add(&self.mul(&m.a, x), &m.b),
                m.c.clone(),
                self.add(&self.mul(&m.c, x), &m.d),
            ),
        }
    }

    /// Product of the letters, left to right; the empty word is the identity.
    pub fn eval_word(&self, w: &ElemWord) -> Mat2 {
        w.letters.iter().fold(self.identity(), |m, l| self.apply_letter(&m, l.side, &l.param))
    }

    /// Reverse order and negate parameters.
    pub fn word_inverse(&self, w: &ElemWord) -> ElemWord {
        ElemWord::new(
            w.letters.iter().rev().map(|l| ElemLetter { side: l.side, param: self.neg(&l.param) }).collect(),
        )
    }

    /// Merge adjacent same-side letters and drop zero parameters, to a
    /// fixpoint. The flag reports whether the input word began with a lower
    /// letter (a leading `L(0)` counts).
    pub fn canonicalize(&self, w: &ElemWord) -> (ElemWord, bool) {
        let mut out: Vec<ElemLetter> = Vec::with_capacity(w.len());
        for l in &w.letters {
            if l.param.is_zero() {
                continue;
            }
            match out.last_mut() {
                Some(prev) if prev.side == l.side => {
                    prev.param = self.add(&prev.param, &l.param);
                    if prev.param.is_zero() {
                        out.pop();
                    }
                }
                _ => out.push(l.clone()),
            }
        }
        (ElemWord::new(out), w.starts_lower())
    }

    /// `[[e,e],[e,e]]`
    pub fn parse_matrix(&self, s: &str) -> Result<Mat2> {
        let mut c = Cursor::new(s);
        let mut entries = Vec::with_capacity(4);
        c.expect(b'[')?;
        for row in 0..2 {
            if row == 1 {
                c.expect(b',')?;
            }
            c.expect(b'[')?;
            for col in 0..2 {
                if col == 1 {
                    c.expect(b',')?;
                }
                c.skip_ws();
                let pos = c.pos;
                let (x, y, den) = parse_raw_element(&mut c)?;
                let e = self.element(x, y, den).map_err(|e| match e {
                    Error::Parse { .. } => e,
                    other => Error::parse(pos, other.to_string()),
                })?;
                entries.push(e);
            }
            c.expect(b']')?;
        }
        c.expect(b']')?;
        c.finish()?;
        let d = entries.pop().unwrap();
        let cc = entries.pop().unwrap();
        let b = entries.pop().unwrap();
        let a = entries.pop().unwrap();
        self.mat(a, b, cc, d)
    }

    pub fn word_from_json(&self, s: &str) -> Result<ElemWord> {
        let raw: WordJson = serde_json::from_str(s).map_err(|e| Error::Json(e.to_string()))?;
        self.word_from_raw(raw.letters)
    }

    /// Accepts either `{"letters":[...]}` or a bare letter array.
    pub fn word_from_value(&self, v: &Value) -> Result<ElemWord> {
        let letters = match v {
            Value::Array(_) => v.clone(),
            _ => v.get("letters").cloned().ok_or_else(|| Error::Json("missing \"letters\"".into()))?,
        };
        let raw: Vec<LetterJson> = serde_json::from_value(letters).map_err(|e| Error::Json(e.to_string()))?;
        self.word_from_raw(raw)
    }

    fn word_from_raw(&self, raw: Vec<LetterJson>) -> Result<ElemWord> {
        raw.into_iter()
            .map(|l| Ok(ElemLetter { side: l.side, param: self.parse_element(&l.param)? }))
            .collect::<Result<Vec<_>>>()
            .map(ElemWord::new)
    }
}
