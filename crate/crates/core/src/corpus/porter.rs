//! Porter suffix-stripping stemmer, original five-step algorithm.
//!
//! Only words made entirely of ASCII lowercase letters are stemmed; anything
//! else (digits, non-ASCII letters) is returned unchanged. Within a step, the
//! longest matching suffix is selected first and, if its condition fails, no
//! shorter suffix of that step is tried.

/// Stems one lowercase word.
pub fn stem(word: &str) -> String {
    if word.is_empty() || !word.bytes().all(|b| b.is_ascii_lowercase()) {
        return word.to_owned();
    }
    let mut w = Word(word.as_bytes().to_vec());
    w.step1a();
    w.step1b();
    w.step1c();
    w.step2();
    w.step3();
    w.step4();
    w.step5a();
    w.step5b();
    // Only ASCII bytes were ever written.
    String::from_utf8(w.0).expect("ascii")
}

type Condition = fn(&[u8]) -> bool;

struct Word(Vec<u8>);

fn is_consonant(w: &[u8], i: usize) -> bool {
    match w[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(w, i - 1),
        _ => true,
    }
}

/// Number of VC sequences in `[C](VC){m}[V]`.
fn measure(w: &[u8]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..w.len() {
        let cons = is_consonant(w, i);
        if cons && prev_vowel {
            m += 1;
        }
        prev_vowel = !cons;
    }
    m
}

fn contains_vowel(w: &[u8]) -> bool {
    (0..w.len()).any(|i| !is_consonant(w, i))
}

fn ends_double_consonant(w: &[u8]) -> bool {
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1)
}

/// `*o`: stem ends consonant-vowel-consonant, final consonant not w, x or y.
fn ends_cvc(w: &[u8]) -> bool {
    let n = w.len();
    n >= 3
        && is_consonant(w, n - 3)
        && !is_consonant(w, n - 2)
        && is_consonant(w, n - 1)
        && !matches!(w[n - 1], b'w' | b'x' | b'y')
}

fn m_gt0(stem: &[u8]) -> bool {
    measure(stem) > 0
}

fn m_gt1(stem: &[u8]) -> bool {
    measure(stem) > 1
}

impl Word {
    fn ends_with(&self, suffix: &str) -> bool {
        self.0.ends_with(suffix.as_bytes())
    }

    fn stem_len(&self, suffix: &str) -> usize {
        self.0.len() - suffix.len()
    }

    fn replace_suffix(&mut self, suffix: &str, replacement: &str) {
        let keep = self.stem_len(suffix);
        self.0.truncate(keep);
        self.0.extend_from_slice(replacement.as_bytes());
    }

    /// Applies the first rule whose suffix matches, if its condition holds.
    /// Returns whether a rule fired.
    fn apply_rules(&mut self, rules: &[(&str, &str, Option<Condition>)]) -> bool {
        for &(suffix, replacement, cond) in rules {
            if self.ends_with(suffix) {
                let stem = &self.0[..self.stem_len(suffix)];
                if cond.is_none_or(|c| c(stem)) {
                    self.replace_suffix(suffix, replacement);
                    return true;
                }
                return false;
            }
        }
        false
    }

    fn step1a(&mut self) {
        self.apply_rules(&[
            ("sses", "ss", None),
            ("ies", "i", None),
            ("ss", "ss", None),
            ("s", "", None),
        ]);
    }

    fn step1b(&mut self) {
        if self.ends_with("eed") {
            if m_gt0(&self.0[..self.stem_len("eed")]) {
                self.replace_suffix("eed", "ee");
            }
            return;
        }
        let removed = ["ed", "ing"].into_iter().find(|suffix| {
            self.ends_with(suffix) && contains_vowel(&self.0[..self.stem_len(suffix)])
        });
        let Some(suffix) = removed else {
            return;
        };
        self.replace_suffix(suffix, "");

        if self.ends_with("at") || self.ends_with("bl") || self.ends_with("iz") {
            self.0.push(b'e');
        } else if ends_double_consonant(&self.0) {
            if !matches!(self.0.last(), Some(b'l' | b's' | b'z')) {
                self.0.pop();
            }
        } else if measure(&self.0) == 1 && ends_cvc(&self.0) {
            self.0.push(b'e');
        }
    }

    fn step1c(&mut self) {
        self.apply_rules(&[("y", "i", Some(contains_vowel))]);
    }

    fn step2(&mut self) {
        self.apply_rules(&[
            ("ational", "ate", Some(m_gt0)),
            ("tional", "tion", Some(m_gt0)),
            ("enci", "ence", Some(m_gt0)),
            ("anci", "ance", Some(m_gt0)),
            ("izer", "ize", Some(m_gt0)),
            ("abli", "able", Some(m_gt0)),
            ("alli", "al", Some(m_gt0)),
            ("entli", "ent", Some(m_gt0)),
            ("eli", "e", Some(m_gt0)),
            ("ousli", "ous", Some(m_gt0)),
            ("ization", "ize", Some(m_gt0)),
            ("ation", "ate", Some(m_gt0)),
            ("ator", "ate", Some(m_gt0)),
            ("alism", "al", Some(m_gt0)),
            ("iveness", "ive", Some(m_gt0)),
            ("fulness", "ful", Some(m_gt0)),
            ("ousness", "ous", Some(m_gt0)),
            ("aliti", "al", Some(m_gt0)),
            ("iviti", "ive", Some(m_gt0)),
            ("biliti", "ble", Some(m_gt0)),
        ]);
    }

    fn step3(&mut self) {
        self.apply_rules(&[
            ("icate", "ic", Some(m_gt0)),
            ("ative", "", Some(m_gt0)),
            ("alize", "al", Some(m_gt0)),
            ("iciti", "ic", Some(m_gt0)),
            ("ical", "ic", Some(m_gt0)),
            ("ful", "", Some(m_gt0)),
            ("ness", "", Some(m_gt0)),
        ]);
    }

    fn step4(&mut self) {
        fn ion_stem(stem: &[u8]) -> bool {
            m_gt1(stem) && matches!(stem.last(), Some(b's' | b't'))
        }
        self.apply_rules(&[
            ("al", "", Some(m_gt1)),
            ("ance", "", Some(m_gt1)),
            ("ence", "", Some(m_gt1)),
            ("er", "", Some(m_gt1)),
            ("ic", "", Some(m_gt1)),
            ("able", "", Some(m_gt1)),
            ("ible", "", Some(m_gt1)),
            ("ant", "", Some(m_gt1)),
            ("ement", "", Some(m_gt1)),
            ("ment", "", Some(m_gt1)),
            ("ent", "", Some(m_gt1)),
            ("ion", "", Some(ion_stem)),
            ("ou", "", Some(m_gt1)),
            ("ism", "", Some(m_gt1)),
            ("ate", "", Some(m_gt1)),
            ("iti", "", Some(m_gt1)),
            ("ous", "", Some(m_gt1)),
            ("ive", "", Some(m_gt1)),
            ("ize", "", Some(m_gt1)),
        ]);
    }

    fn step5a(&mut self) {
        if !self.ends_with("e") {
            return;
        }
        let stem = &self.0[..self.0.len() - 1];
        let m = measure(stem);
        if m > 1 || (m == 1 && !ends_cvc(stem)) {
            self.0.pop();
        }
    }

    fn step5b(&mut self) {
        if self.ends_with("ll") && m_gt1(&self.0[..self.0.len() - 1]) {
            self.0.pop();
        }
    }
}
