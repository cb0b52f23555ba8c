//! Character inventory of the mention CNN: printable ASCII, one unknown id and
//! one padding id.

pub const UNK: usize = 95;
pub const PAD: usize = 96;
pub const VOCAB_SIZE: usize = 97;

pub fn char_id(c: char) -> usize {
    if (' '..='~').contains(&c) {
        c as usize - 32
    } else {
        UNK
    }
}

/// Ids of `text`, truncated to `max_chars` and right-padded to at least `min_len`.
pub fn encode(text: &str, max_chars: usize, min_len: usize) -> Vec<usize> {
    let count = text.chars().count();
    if count > max_chars {
        log::warn!("mention of {count} characters truncated to {max_chars}: {text:?}");
    }
    let mut ids: Vec<usize> = text.chars().take(max_chars).map(char_id).collect();
    if ids.len() < min_len {
        ids.resize(min_len, PAD);
    }
    ids
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids() {
        assert_eq!(char_id(' '), 0);
        assert_eq!(char_id('~'), 94);
        assert_eq!(char_id('é'), UNK);
        assert_eq!(encode("ab", 50, 4), vec![65, 66, PAD, PAD]);
        assert_eq!(encode("abcdef", 3, 1).len(), 3);
    }
}
