"""Mining commit messages for developer-documented bug-inducing commits.

A message survives a cheap word prefilter, then each of its sentences is
checked against three heuristics over a dependency tree:

  H1 rejects sentences with no commit hash, sentences that begin with a
     hash, and sentences where "revert" governs a hash.
  H2 accepts a hash governed by "introduce" when a fix word and a bug word
     appear among the hash token's ancestors or descendants, at least one
     of them as an ancestor, and no "attempt"/"test" governs the hash.
  H3 applies only without an "introduce" ancestor: both a fix and a bug
     word must be ancestors of the hash, with no stop-word among the hash's
     ancestors nor around the fix word itself.

Dependency parses are consumed from a columnar file, never produced here.
When no parses exist, an explicitly lower-fidelity proximity mode matches
word stems in a six-token window before each hash.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import SchemaError

FIX_WORDS = frozenset({"fix", "solve"})
BUG_WORDS = frozenset({"bug", "issue", "problem", "error", "misfeature"})
H3_STOPWORDS = frozenset(
    {"was", "been", "seem", "solved", "fixed", "try", "trie", "by", "attempt", "test"}
)
INTRODUCE_WORDS = frozenset({"introduce"})
H2_BLOCK_WORDS = frozenset({"attempt", "test"})
REVERT_WORDS = frozenset({"revert"})

# stems for prefilter / proximity mode, where no lemmas are available
FIX_STEMS = ("fix", "solv")
BUG_STEMS = ("bug", "issue", "problem", "error", "misfeature")
EXCLUDE_STEMS = ("merg",)

HASH_RE = re.compile(r"(?<![0-9a-zA-Z_])[0-9a-f]{6,40}(?![0-9a-zA-Z_])")

PREFILTER = "prefilter"
PARSE_UNAVAILABLE = "parse-unavailable"
NO_HASH = "no-hash"
STARTS_WITH_HASH = "starts-with-hash"
REVERT = "revert"
HEURISTICS_FAILED = "h2h3-failed"

# later stages outrank earlier ones when summarizing why a message failed
_REASON_RANK = {
    PREFILTER: 0,
    PARSE_UNAVAILABLE: 1,
    NO_HASH: 2,
    STARTS_WITH_HASH: 3,
    REVERT: 4,
    HEURISTICS_FAILED: 5,
}


@dataclass(frozen=True)
class Token:
    index: int
    form: str
    lemma: str
    head: int
    rel: str


class SentenceTree:
    """One sentence's dependency tree. Head index 0 is the artificial
    root; token indices are 1-based."""

    def __init__(self, text: str, tokens: list[Token]):
        self.text = text
        self.tokens = tokens
        self._by_index = {t.index: t for t in tokens}
        self._validate()

    def _validate(self) -> None:
        if not self.tokens:
            raise SchemaError("empty sentence")
        roots = 0
        for t in self.tokens:
            head = t.head
            if head == t.index:  # self-loop convention for roots
                head = 0
            if head == 0:
                roots += 1
            elif head not in self._by_index:
                raise SchemaError(f"token {t.index} has out-of-range head {t.head}")
        if roots != 1:
            raise SchemaError(f"expected exactly one root, found {roots}")
        for t in self.tokens:
            seen = set()
            cur = t.index
            while cur != 0:
                if cur in seen:
                    raise SchemaError("dependency tree contains a cycle")
                seen.add(cur)
                head = self._by_index[cur].head
                cur = 0 if head == cur else head

    def token(self, index: int) -> Token:
        return self._by_index[index]

    def ancestors(self, index: int) -> list[Token]:
        """Head chain from the token's parent up to the root, excluding
        the token itself."""
        out = []
        cur = self._by_index[index].head
        if cur == index:
            cur = 0
        while cur != 0:
            t = self._by_index[cur]
            out.append(t)
            nxt = t.head
            cur = 0 if nxt == cur else nxt
        return out

    def descendants(self, index: int) -> list[Token]:
        """Every token in the subtree below the token (its dependents,
        transitively)."""
        children: dict[int, list[int]] = {}
        for t in self.tokens:
            head = 0 if t.head == t.index else t.head
            children.setdefault(head, []).append(t.index)
        out: list[Token] = []
        stack = list(children.get(index, ()))
        while stack:
            i = stack.pop()
            out.append(self._by_index[i])
            stack.extend(children.get(i, ()))
        out.sort(key=lambda t: t.index)
        return out

    def hash_token_indices(self) -> list[tuple[int, str]]:
        out = []
        for t in self.tokens:
            m = HASH_RE.search(t.form)
            if m:
                out.append((t.index, m.group(0)))
        return out


def _matches(token: Token, words: frozenset[str]) -> bool:
    return token.form.lower() in words or token.lemma.lower() in words


def word_prefilter(message: str) -> bool:
    """Cheap gate: a fix-related and a bug-related word must both occur,
    and nothing merge-related may."""
    tokens = re.findall(r"[a-z0-9]+", message.lower())
    has_fix = has_bug = False
    for tok in tokens:
        if tok.startswith(EXCLUDE_STEMS):
            return False
        has_fix = has_fix or tok.startswith(FIX_STEMS)
        has_bug = has_bug or tok.startswith(BUG_STEMS)
    return has_fix and has_bug


def extract_hashes(sentence: str) -> list[str]:
    """All word-bounded lowercase hex runs of 6 to 40 characters, in
    order of appearance."""
    return HASH_RE.findall(sentence)


def _starts_with_hash(text: str) -> bool:
    first = text.split(None, 1)
    if not first:
        return False
    token = first[0].strip("\"'`([{<.,:;!?)]}>")
    return bool(re.fullmatch(r"[0-9a-f]{6,40}", token))


def h1_filter(tree: SentenceTree) -> tuple[bool, str | None]:
    """Sentence-level gate. Returns (passed, rejection reason)."""
    hashes = tree.hash_token_indices()
    if not hashes:
        return False, NO_HASH
    if _starts_with_hash(tree.text):
        return False, STARTS_WITH_HASH
    for idx, _ in hashes:
        if any(_matches(t, REVERT_WORDS) for t in tree.ancestors(idx)):
            return False, REVERT
    return True, None


def _has_introduce_ancestor(tree: SentenceTree, idx: int) -> bool:
    return any(_matches(t, INTRODUCE_WORDS) for t in tree.ancestors(idx))


def h2_filter(tree: SentenceTree, idx: int) -> bool:
    """Hash introduced-by pattern: an "introduce" ancestor, fix and bug
    words among ancestors plus descendants with at least one being an
    ancestor, and no "attempt"/"test" ancestor."""
    anc = tree.ancestors(idx)
    if not any(_matches(t, INTRODUCE_WORDS) for t in anc):
        return False
    if any(_matches(t, H2_BLOCK_WORDS) for t in anc):
        return False
    pool = anc + tree.descendants(idx)
    fix_any = any(_matches(t, FIX_WORDS) for t in pool)
    bug_any = any(_matches(t, BUG_WORDS) for t in pool)
    fix_anc = any(_matches(t, FIX_WORDS) for t in anc)
    bug_anc = any(_matches(t, BUG_WORDS) for t in anc)
    return fix_any and bug_any and (fix_anc or bug_anc)


def _is_stopword(token: Token) -> bool:
    return token.form.lower() in H3_STOPWORDS or token.lemma.lower() in H3_STOPWORDS


def h3_filter(tree: SentenceTree, idx: int) -> bool:
    """Fallback pattern when nothing "introduces" the hash: both a fix and
    a bug word govern it, the hash's ancestry is stop-word free, and at
    least one governing fix word has no stop-word among its own ancestors
    or descendants."""
    anc = tree.ancestors(idx)
    fix_ancestors = [t for t in anc if _matches(t, FIX_WORDS)]
    if not fix_ancestors:
        return False
    if not any(_matches(t, BUG_WORDS) for t in anc):
        return False
    if any(_is_stopword(t) for t in anc):
        return False
    for f in fix_ancestors:
        around = tree.ancestors(f.index) + tree.descendants(f.index)
        if not any(_is_stopword(t) for t in around):
            return True
    return False


@dataclass
class SentenceMatch:
    sentence_index: int
    hash: str
    heuristic: str  # "h2" or "h3"


@dataclass
class MessageAnalysis:
    repo: str
    commit: str
    verdict: str  # "accepted" or "rejected"
    reason: str | None = None
    matches: list[SentenceMatch] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def to_record(self) -> dict:
        rec = {
            "repo": self.repo,
            "commit": self.commit,
            "verdict": self.verdict,
        }
        if self.reason:
            rec["reason"] = self.reason
        if self.matches:
            rec["matches"] = [
                {"sentence": m.sentence_index, "hash": m.hash, "heuristic": m.heuristic}
                for m in self.matches
            ]
        if self.flags:
            rec["flags"] = sorted(self.flags)
        return rec


def analyze_with_trees(trees: list[SentenceTree]) -> tuple[list[SentenceMatch], str]:
    """Run H1 then H2/H3 over every sentence; returns the accepted matches
    and the deepest rejection reason reached when nothing matched."""
    matches: list[SentenceMatch] = []
    worst = NO_HASH
    for s_index, tree in enumerate(trees):
        ok, reason = h1_filter(tree)
        if not ok:
            if _REASON_RANK[reason] > _REASON_RANK[worst]:
                worst = reason
            continue
        worst = HEURISTICS_FAILED
        for idx, hash_str in tree.hash_token_indices():
            if _has_introduce_ancestor(tree, idx):
                if h2_filter(tree, idx):
                    matches.append(SentenceMatch(s_index, hash_str, "h2"))
            elif h3_filter(tree, idx):
                matches.append(SentenceMatch(s_index, hash_str, "h3"))
    return matches, worst


# -- proximity fallback (no parses) --------------------------------------


def split_sentences(message: str) -> list[str]:
    parts = re.split(r"(?<=[.!?])\s+|\n+", message.strip())
    return [p.strip() for p in parts if p.strip()]


def _norm_tokens(sentence: str) -> list[str]:
    return [t.strip("\"'`([{<.,:;!?)]}>*#") .lower() for t in sentence.split()]


def proximity_matches(sentence: str, window: int = 6) -> tuple[list[str], str]:
    """Stem matching in a token window before each hash. Lower fidelity
    than the tree heuristics: declensions are prefix-matched and any
    stop-word stem in the window rejects the hash."""
    tokens = _norm_tokens(sentence)
    tokens = [t for t in tokens if t]
    if not tokens:
        return [], NO_HASH
    if re.fullmatch(r"[0-9a-f]{6,40}", tokens[0]):
        return [], STARTS_WITH_HASH
    if any(t.startswith("revert") for t in tokens):
        return [], REVERT
    hashes = []
    saw_hash = False
    stop_stems = tuple(H3_STOPWORDS)
    for i, tok in enumerate(tokens):
        if not re.fullmatch(r"[0-9a-f]{6,40}", tok):
            continue
        saw_hash = True
        win = tokens[max(0, i - window) : i]
        if any(w.startswith(stop_stems) for w in win):
            continue
        if any(w.startswith(FIX_STEMS) for w in win) and any(
            w.startswith(BUG_STEMS) for w in win
        ):
            hashes.append(tok)
    if not saw_hash:
        return [], NO_HASH
    return hashes, HEURISTICS_FAILED


# -- event stream processing ----------------------------------------------


@dataclass
class RunSummary:
    total: int = 0
    accepted: int = 0
    rejected_by_reason: dict[str, int] = field(default_factory=dict)
    h2_matches: int = 0
    h3_matches: int = 0
    duplicates_removed: int = 0
    proximity_mode: bool = False

    def reject(self, reason: str) -> None:
        self.rejected_by_reason[reason] = self.rejected_by_reason.get(reason, 0) + 1

    def to_record(self) -> dict:
        return {
            "total": self.total,
            "accepted": self.accepted,
            "rejected": dict(sorted(self.rejected_by_reason.items())),
            "h2_matches": self.h2_matches,
            "h3_matches": self.h3_matches,
            "duplicates_removed": self.duplicates_removed,
            "proximity_mode": self.proximity_mode,
        }


def mine_stream(
    events,
    parses: "dict[str, list[SentenceTree] | None] | None" = None,
    proximity: bool = False,
    fork_index: dict[str, str] | None = None,
) -> tuple[list[MessageAnalysis], RunSummary]:
    """Analyze an iterable of commit events (dicts with ``repo``, ``sha``,
    ``message``). Returns every analysis (accepted records deduplicated
    across forks) plus run counters."""
    summary = RunSummary(proximity_mode=proximity)
    analyses: list[MessageAnalysis] = []
    for ev in events:
        repo = ev["repo"]
        sha = ev["sha"]
        message = ev["message"]
        summary.total += 1

        if not word_prefilter(message):
            summary.reject(PREFILTER)
            analyses.append(MessageAnalysis(repo, sha, "rejected", PREFILTER))
            continue

        trees = parses.get(sha) if parses else None
        if trees is not None:
            matches, worst = analyze_with_trees(trees)
        elif proximity:
            matches = []
            worst = NO_HASH
            for s_index, sent in enumerate(split_sentences(message)):
                found, reason = proximity_matches(sent)
                for h in found:
                    matches.append(SentenceMatch(s_index, h, "proximity"))
                if _REASON_RANK[reason] > _REASON_RANK[worst]:
                    worst = reason
        else:
            summary.reject(PARSE_UNAVAILABLE)
            analyses.append(MessageAnalysis(repo, sha, "rejected", PARSE_UNAVAILABLE))
            continue

        if matches:
            summary.accepted += 1
            summary.h2_matches += sum(1 for m in matches if m.heuristic == "h2")
            summary.h3_matches += sum(1 for m in matches if m.heuristic == "h3")
            analyses.append(MessageAnalysis(repo, sha, "accepted", None, matches))
        else:
            summary.reject(worst)
            analyses.append(MessageAnalysis(repo, sha, "rejected", worst))

    deduped = dedupe(
        [a for a in analyses if a.verdict == "accepted"], fork_index or {}
    )
    kept_ids = {id(a) for a in deduped}
    out = [a for a in analyses if a.verdict != "accepted" or id(a) in kept_ids]
    summary.duplicates_removed = summary.accepted - len(deduped)
    summary.accepted = len(deduped)
    return out, summary


def dedupe(
    accepted: list[MessageAnalysis], fork_index: dict[str, str]
) -> list[MessageAnalysis]:
    """Collapse records sharing a commit hash (fork pushes) down to one.

    The record from the designated main repository wins; with no
    designation the lexicographically first repository is kept and the
    record is flagged, never silently dropped."""
    by_sha: dict[str, list[MessageAnalysis]] = {}
    order: list[str] = []
    for a in accepted:
        if a.commit not in by_sha:
            order.append(a.commit)
        by_sha.setdefault(a.commit, []).append(a)
    out: list[MessageAnalysis] = []
    for sha in order:
        group = by_sha[sha]
        if len(group) == 1:
            out.append(group[0])
            continue
        main = fork_index.get(sha)
        chosen = None
        if main is not None:
            for a in group:
                if a.repo == main:
                    chosen = a
                    break
        if chosen is None:
            chosen = min(group, key=lambda a: a.repo)
            if "duplicate-unresolved" not in chosen.flags:
                chosen.flags.append("duplicate-unresolved")
        out.append(chosen)
    return out


# -- input formats ----------------------------------------------------------


def load_parses(path) -> dict[str, "list[SentenceTree] | None"]:
    """Read dependency parses: blocks of tab-separated token rows
    (index, form, lemma, head, relation) introduced by ``# commit =`` and
    ``# text =`` lines and separated by blank lines. A commit whose block
    fails validation maps to None so callers can report it as unparsed."""
    result: dict[str, list[SentenceTree] | None] = {}
    commit: str | None = None
    text = ""
    rows: list[Token] = []

    def flush() -> None:
        nonlocal rows, text
        if not rows:
            return
        if commit is None:
            raise SchemaError("token rows before any '# commit =' line")
        if result.get(commit, []) is not None:
            try:
                tree = SentenceTree(text, rows)
                result.setdefault(commit, []).append(tree)
            except SchemaError:
                result[commit] = None
        rows = []
        text = ""

    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                flush()
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if body.startswith("commit"):
                    flush()
                    commit = body.split("=", 1)[1].strip()
                elif body.startswith("text"):
                    text = body.split("=", 1)[1].strip()
                continue
            cols = line.split("\t")
            if len(cols) != 5:
                raise SchemaError(f"{path}:{line_no}: expected 5 tab-separated columns")
            try:
                rows.append(
                    Token(int(cols[0]), cols[1], cols[2], int(cols[3]), cols[4])
                )
            except ValueError as exc:
                raise SchemaError(f"{path}:{line_no}: {exc}") from None
    flush()
    return result


def read_events(path):
    """Yield events from a newline-delimited JSON file with ``repo``,
    ``sha`` and ``message`` fields."""
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{line_no}: {exc}") from None
            for key in ("repo", "sha", "message"):
                if key not in obj:
                    raise SchemaError(f"{path}:{line_no}: missing field {key!r}")
            yield obj


def events_from_gharchive(payload: dict) -> list[dict]:
    """Convert one GH-Archive-style push event into plain commit events."""
    if payload.get("type") != "PushEvent":
        return []
    repo = payload.get("repo", {}).get("name", "")
    out = []
    for c in payload.get("payload", {}).get("commits", []):
        if "sha" in c and "message" in c:
            out.append({"repo": repo, "sha": c["sha"], "message": c["message"]})
    return out
