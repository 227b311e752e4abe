//! PII scrubbing applied to every free-text field before it is stored.

use std::sync::OnceLock;

use regex::Regex;

pub const EMAIL: &str = "[EMAIL]";
pub const PHONE: &str = "[PHONE]";
pub const NUM: &str = "[NUM]";

const EMAIL_PATTERN: &str = r"[A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(?:\.[A-Za-z0-9\-]+)*\.[A-Za-z]{2,}";
const NUM_PATTERN: &str = r"[0-9]{16,}";
/// Seven or more digits, optionally separated by spaces, dots, dashes,
/// slashes or parentheses, with an optional leading `+`.
const PHONE_PATTERN: &str = r"\+?\(?[0-9](?:[ .\-/()]*[0-9]){6,}";

struct Patterns {
    email: Regex,
    num: Regex,
    phone: Regex,
}

fn patterns() -> &'static Patterns {
    static P: OnceLock<Patterns> = OnceLock::new();
    P.get_or_init(|| Patterns {
        email: Regex::new(EMAIL_PATTERN).expect("email pattern"),
        num: Regex::new(NUM_PATTERN).expect("number pattern"),
        phone: Regex::new(PHONE_PATTERN).expect("phone pattern"),
    })
}

/// Replaces e-mail addresses, runs of 16+ digits and phone-like digit groups
/// with fixed placeholders. Idempotent.
pub fn scrub_pii(text: &str) -> String {
    let p = patterns();
    let s = p.email.replace_all(text, EMAIL);
    let s = p.num.replace_all(&s, NUM);
    p.phone.replace_all(&s, PHONE).into_owned()
}

/// True if `text` still contains anything the scrubber would replace.
pub fn contains_pii(text: &str) -> bool {
    let p = patterns();
    p.email.is_match(text) || p.num.is_match(text) || p.phone.is_match(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn email_is_replaced() {
        assert_eq!(scrub_pii("mail me at a.b@uni.de"), "mail me at [EMAIL]");
    }

    #[test]
    fn clean_text_is_unchanged() {
        let t = "How do I sort a list of 3 items in O(n log n)?";
        assert_eq!(scrub_pii(t), t);
        assert!(!contains_pii(t));
    }

    #[test]
    fn phones_and_card_numbers() {
        assert_eq!(scrub_pii("call +49 (30) 123-4567 now"), "call [PHONE] now");
        assert_eq!(scrub_pii("555.123.4567"), PHONE);
        assert_eq!(scrub_pii("card 4111111111111111 ok"), "card [NUM] ok");
        assert_eq!(scrub_pii("room 123456"), "room 123456");
    }

    #[test]
    fn placeholders_survive_a_second_pass() {
        let once = scrub_pii("x a@b.io 1234567 4111111111111111 y@z.org");
        assert_eq!(once, "x [EMAIL] [PHONE] [NUM] [EMAIL]");
        assert_eq!(scrub_pii(&once), once);
    }

    fn pii_text() -> impl Strategy<Value = String> {
        let piece = prop_oneof![
            "[a-z]{1,8}",
            "[a-z]{1,6}\\.[a-z]{1,6}@[a-z]{2,8}\\.(com|de|org)",
            "\\+?[0-9]{3}[ .\\-][0-9]{3}[ .\\-][0-9]{4}",
            "[0-9]{16}",
            "[0-9]{1,5}",
            "[ ,.;:()@+\\-]{1,3}",
        ];
        prop::collection::vec(piece, 0..12).prop_map(|v| v.join(" "))
    }

    proptest! {
        #[test]
        fn scrub_is_idempotent(s in "\\PC{0,60}") {
            let once = scrub_pii(&s);
            prop_assert_eq!(scrub_pii(&once), once);
        }

        #[test]
        fn scrubbed_text_has_no_pii(s in pii_text()) {
            let once = scrub_pii(&s);
            prop_assert!(!contains_pii(&once), "{:?} -> {:?}", s, once);
            prop_assert_eq!(scrub_pii(&once), once.clone());
        }
    }
}
