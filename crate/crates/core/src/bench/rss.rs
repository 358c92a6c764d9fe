//! Resident memory of processes, from `/proc/<pid>/status` on Linux.
//! Elsewhere every query returns `None`.

fn status_kb(pid: &str, key: &str) -> Option<u64> {
    let text = std::fs::read_to_string(format!("/proc/{pid}/status")).ok()?;
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .and_then(|v| v.trim().trim_end_matches("kB").trim().parse::<u64>().ok())
        .map(|kb| kb * 1024)
}

/// Current resident set size of `pid`.
pub fn rss_bytes(pid: u32) -> Option<u64> {
    status_kb(&pid.to_string(), "VmRSS:")
}

/// Current resident set size of this process.
pub fn self_rss_bytes() -> Option<u64> {
    status_kb("self", "VmRSS:")
}

/// Peak resident set size of this process so far.
pub fn self_peak_rss_bytes() -> Option<u64> {
    status_kb("self", "VmHWM:")
}
