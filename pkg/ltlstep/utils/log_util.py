ELLIPSIS = "<...>"


def make_short_str(value, max_len=200, is_strip_in_the_middle=True):
    """Shortens long payloads (formulas, JSON errors, failure lists) for log lines."""
    text = str(value)
    if max_len < 0 or len(text) <= max_len:
        return text
    if not is_strip_in_the_middle:
        return text[:max_len] + "..."
    head = (max_len + 1) // 2
    tail = max_len // 2
    return text[:head] + ELLIPSIS + (text[-tail:] if tail else "")


def format_names(names, max_count=4):
    # "3: p_R1, p_R2, p_R3" or "12: p_R1, p_R2 .. p_R12"
    if not names:
        return "0"
    names = [str(name) for name in names]
    if len(names) <= max_count:
        return "%s: %s" % (len(names), ", ".join(names))
    shown = names[:max(max_count - 1, 1)]
    return "%s: %s .. %s" % (len(names), ", ".join(shown), names[-1])
