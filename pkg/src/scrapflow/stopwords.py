"""Bundled default stopword list for description preprocessing.

Approximates a frequent-word list augmented with filler vocabulary common
in company registry descriptions. Tokens of length <= 3 are removed by the
preprocessing length rule regardless, so short function words are omitted
here. Checked against the post-lemmatization token, so inflected fillers
appear alongside their base forms where suffix stripping does not fold
them.
"""
from __future__ import annotations

# Common English function and high-frequency words (length >= 4).
_GENERAL = (
    "about above across after again against almost along already also "
    "although always among anyone anything around because been before being "
    "below between both cannot could does down during each either else "
    "enough even ever every everything first founded four from further "
    "have having here herself himself however into itself just least "
    "less like made make makes making many maybe more moreover most much "
    "must near nearly neither never nevertheless next nothing often once "
    "only onto other others otherwise over perhaps rather same several "
    "shall should since some something sometimes still such than that their "
    "theirs them themselves then there therefore these they this those "
    "three through throughout thus together toward towards under until upon "
    "used uses using very were what when where whereas whether which while "
    "whom whose will with within without would your yours"
)

# Registry-description fillers: legal forms, hedges, and boilerplate verbs
# that carry no topical signal in business descriptions.
_REGISTRY = (
    "active addition additionally business businesses company corporation "
    "currently engaged engages enterprise enterprises established firm "
    "firms focus focused focuses following formerly found group holding "
    "holdings include included includes including incorporated "
    "international limited liability located main mainly offer offered "
    "offering offers operate operated operates operating operation "
    "operations primarily primary principal principally provide provided "
    "provider provides providing range ranges registered related sector "
    "sectors service services specialise specialised specialises "
    "specialize specialized specializes subsidiary various wide worldwide"
)

DEFAULT_STOPWORDS: frozenset[str] = frozenset((_GENERAL + " " + _REGISTRY).split())
