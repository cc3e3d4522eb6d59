//! Tweet cleaning and target marking.

use super::sample::{Sample, TARGET_PLACEHOLDER};
use crate::error::{Error, Result};

pub const TARGET_OPEN: &str = "[target]";
pub const TARGET_CLOSE: &str = "[/target]";

/// Strips control characters and collapses whitespace runs into one space.
pub fn normalize_noise(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if c.is_control() {
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        out.push(c);
    }
    out
}

/// Byte range of the first case-insensitive occurrence of `needle`.
pub fn find_ignore_case(haystack: &str, needle: &str) -> Option<(usize, usize)> {
    if needle.is_empty() {
        return None;
    }
    if let Some(start) = haystack.find(needle) {
        return Some((start, start + needle.len()));
    }
    for (start, _) in haystack.char_indices() {
        let mut hay = haystack[start..].char_indices();
        let mut matched = true;
        let mut end = start;
        for n in needle.chars() {
            match hay.next() {
                Some((off, h)) if h.to_lowercase().eq(n.to_lowercase()) => {
                    end = start + off + h.len_utf8();
                }
                _ => {
                    matched = false;
                    break;
                }
            }
        }
        if matched {
            return Some((start, end));
        }
    }
    None
}

/// Normalizes noise and wraps the target mention in `[target] … [/target]`.
///
/// `$T$` takes precedence over a verbatim mention; with several `$T$`
/// placeholders every one is filled with the target text but only the first
/// is wrapped. Without a placeholder the first case-insensitive occurrence
/// of the target is wrapped, keeping the tweet's own spelling. Text that is
/// already marked is only normalized, so the function is idempotent.
pub fn clean_tweet(sample: &Sample) -> Result<String> {
    let tweet = normalize_noise(&sample.tweet);
    let target = normalize_noise(&sample.target);
    if target.is_empty() {
        return Err(Error::Validation(format!("sample {}: empty target", sample.sample_id)));
    }
    if tweet.contains(TARGET_OPEN) && tweet.contains(TARGET_CLOSE) {
        return Ok(tweet);
    }

    if let Some(pos) = tweet.find(TARGET_PLACEHOLDER) {
        let head = &tweet[..pos];
        let tail = tweet[pos + TARGET_PLACEHOLDER.len()..].replace(TARGET_PLACEHOLDER, &target);
        return Ok(format!("{head}{TARGET_OPEN} {target} {TARGET_CLOSE}{tail}"));
    }

    match find_ignore_case(&tweet, &target) {
        Some((start, end)) => Ok(format!(
            "{}{TARGET_OPEN} {} {TARGET_CLOSE}{}",
            &tweet[..start],
            &tweet[start..end],
            &tweet[end..]
        )),
        None => Err(Error::MissingTarget {
            tweet: sample.tweet.clone(),
            target: sample.target.clone(),
        }),
    }
}
