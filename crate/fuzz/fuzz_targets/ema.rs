#![no_main]

use ema_core::doc::{DocKind, Document};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = Document::parse_as(text, DocKind::Ema) {
        let again = Document::parse_as(&doc.to_json(), DocKind::Ema).expect("emitted documents parse");
        assert_eq!(again.body_json(), doc.body_json());
    }
});
