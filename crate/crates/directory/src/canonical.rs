// SPDX-License-Identifier: Apache-2.0

//! Maps the many spellings of one mailbox to a single account id.

use crate::DirectoryError;

const GMAIL_DOMAINS: [&str; 2] = ["gmail.com", "googlemail.com"];
const ALIAS_SUFFIX: &str = ".33mail.com";

pub fn canonicalize(email: &str) -> Result<String, DirectoryError> {
    let malformed = || DirectoryError::MalformedAddress(email.to_string());
    let lower = email.trim().to_lowercase();
    let (local, domain) = lower.split_once('@').ok_or_else(malformed)?;
    if local.is_empty()
        || domain.contains('@')
        || !domain.contains('.')
        || domain.starts_with('.')
        || domain.ends_with('.')
        || lower.chars().any(char::is_whitespace)
    {
        return Err(malformed());
    }
    if GMAIL_DOMAINS.contains(&domain) {
        let base = local.split('+').next().unwrap_or("").replace('.', "");
        if base.is_empty() {
            return Err(malformed());
        }
        return Ok(format!("{base}@gmail.com"));
    }
    if let Some(user) = domain.strip_suffix(ALIAS_SUFFIX) {
        if user.is_empty() || user.contains('.') {
            return Err(malformed());
        }
        return Ok(format!("you@{domain}"));
    }
    Ok(lower)
}
