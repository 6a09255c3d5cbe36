#pragma once

#include <string_view>

// Built-in copies of the files under data/, written by tools/embed_defaults.py.
// tests/test_defaults.cpp keeps them in sync.

namespace ccp::defaults {

inline constexpr std::string_view kDefaultTermModel = R"ccp(# Default corrective-commit term model.
# Patterns are matched against the lowercased commit message (subject and body).
# Each pattern counts at most once per message. A message is corrective when
#   (#fix patterns matched) - (#other_fix matched) - (#negation matched) > 0.
# Seed terms: bug, failure, correct this (fix); fixed indentation, error
# message (other fixes); "not an error" style negations. Remaining entries are
# common morphological and synonymous forms.
model_id: ccp-default-1.0

[fix]
\bbugs?\b
\bbug ?fix(es|ed|ing)?\b
\bhot ?fix(es|ed|ing)?\b
\bfix(es|ed|ing)?\b
\bfail(s|ed|ing)?\b
\bfailures?\b
\berrors?\b
\berroneous(ly)?\b
\bcrash(es|ed|ing)?\b
\bcorrect this\b
\bcorrect(s|ed|ing)? (the |a )?(bug|behaviou?r|handling|calculation|check|value|result|logic|order)\b
\bdefects?\b
\bfault(s|y)?\b
\bflaw(s|ed)?\b
\bmistakes?\b
\bmistaken(ly)?\b
\bincorrect(ly)?\b
\bwrong(ly)?\b
\bbroken\b
\bbreakage\b
\bregress(ion|ions|ed)\b
\bsegfault(s|ed)?\b
\bsegmentation fault\b
\bnull ?pointer\b
\bnpe\b
\bmemory leaks?\b
\bleak(s|ed|ing)?\b
\bdeadlocks?\b
\brace conditions?\b
\bhang(s|ing)?\b
\bfreez(e|es|ing)\b
\binfinite loop\b
\boff[- ]by[- ]one\b
\boverflows?\b
\bunderflow\b
\bproblems?\b
\bglitch(es)?\b
\bunexpected(ly)?\b
\bwork ?around\b
\brepair(s|ed|ing)?\b
\bresolve[sd]? (a |the )?(bug|crash|problem|error|leak)
\bvulnerabilit(y|ies)\b
\bcve-[0-9]+
\bmisbehav(e|es|ed|ing|iou?r)\b
\b(uncaught|unhandled) exceptions?\b
\bpanic(s|ked)?\b
\bmalfunction(s|ing)?\b
\b(does|do|did)(n't| not) work\b
\bnot working\b
\binvalid (read|write|memory|access|free|pointer)\b
\bdouble free\b
\buse[- ]after[- ]free\b
\bcorrupt(s|ed|ion)?\b

[other_fix]
\bfix(es|ed|ing)? (the |some |a )?(indentation|typos?|whitespace|formatting|format|spelling|style|lint(ing)?|comments?|docs?|documentation|readme|links?|wording|grammar|(compiler |build )?warnings?|tests?|test cases?|unit tests?|specs?|ci|build|merge conflicts?|conflicts?|changelog)\b
\berror (messages?|codes?|handling|reporting|logging|pages?|strings?|text)\b
\btypos?\b
\bspelling\b
\bbug (reports?|tracker|templates?|labels?)\b

[negation]
\bnot an? (bug|error|failure|crash|problem|defect|issue)\b
\bno (bugs?|errors?|failures?|crash(es)?|problems?)\b
\bwithout (any )?(errors?|failures?|crash(es|ing)?|problems?|bugs?)\b
\b(is|was|are|were)(n't| not) (a )?(bug|error|problem|broken)\b
\bnot (broken|wrong|failing|incorrect)\b
\bnever (fails?|crash(es)?)\b
)ccp";

inline constexpr std::string_view kDefaultEnglishModel = R"ccp(# 100 frequent English words longer than two letters, one per line.
the
and
that
have
for
not
with
you
this
but
his
from
they
say
her
she
will
one
all
would
there
their
what
out
about
who
get
which
when
make
can
like
time
just
him
know
take
people
into
year
your
good
some
could
them
see
other
than
then
now
look
only
come
its
over
think
also
back
after
use
two
how
our
work
first
well
way
even
new
want
because
any
these
give
day
most
are
was
were
been
has
had
did
does
may
should
more
very
where
why
here
such
many
those
same
each
made
said
find
long
)ccp";

inline constexpr std::string_view kDefaultPerformance = R"ccp(# Classifier performance used by the maximum-likelihood CCP estimator.
# Rounded from the reference gold-standard test set (TP=228, FN=43, FP=34, TN=795).
model_id=ccp-default-1.0
recall=0.84
fpr=0.042
)ccp";

inline constexpr std::string_view kDefaultDistributionTable = R"ccp(# Valid-domain CCP thresholds by percentile, measured over 7,557 active GitHub
# projects with 200+ commits in 2019. Higher percentile = lower CCP = better.
percentile,ccp
10,0.39
20,0.32
30,0.27
40,0.23
50,0.20
60,0.17
70,0.13
80,0.10
90,0.06
95,0.04
)ccp";

}  // namespace ccp::defaults
