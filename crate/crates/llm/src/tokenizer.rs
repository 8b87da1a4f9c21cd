//! The documented token counter.
//!
//! Rules: split on Unicode whitespace; within each chunk, maximal runs of
//! alphanumeric/underscore characters are tokens and every other character
//! is a single-character token, except that a `?` or `$` immediately
//! followed by a word character fuses with that run (SPARQL variables count
//! as one token). Token counts are therefore deterministic and
//! backend-independent; they are comparable only within this project.

pub fn count_tokens(text: &str) -> u64 {
    let mut count = 0u64;
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_alphanumeric() || c == '_' {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                count += 1;
            } else if (c == '?' || c == '$')
                && i + 1 < chars.len()
                && (chars[i + 1].is_alphanumeric() || chars[i + 1] == '_')
            {
                i += 1;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                count += 1;
            } else {
                i += 1;
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_string_counts_zero() {
        assert_eq!(count_tokens(""), 0);
        assert_eq!(count_tokens("   \n\t "), 0);
    }

    #[test]
    fn space_separated_words_count_as_themselves() {
        assert_eq!(count_tokens("one two three"), 3);
    }

    /// Hand trace of the documented rules over a small query:
    /// SELECT | ?x | WHERE | { | ?x | a | ex | : | Actor | } — ten tokens,
    /// with `?x` fused and `{`, `:`, `}` split off.
    #[test]
    fn sparql_query_hand_trace() {
        assert_eq!(count_tokens("SELECT ?x WHERE { ?x a ex:Actor }"), 10);
    }

    #[test]
    fn additive_over_punctuation_free_parts() {
        let a = "alpha beta gamma";
        let b = "delta epsilon";
        assert_eq!(
            count_tokens(&format!("{a} {b}")),
            count_tokens(a) + count_tokens(b)
        );
    }

    #[test]
    fn lone_sigil_is_its_own_token() {
        assert_eq!(count_tokens("? !"), 2);
        assert_eq!(count_tokens("?x"), 1);
        assert_eq!(count_tokens("ex:Actor"), 3);
    }
}
