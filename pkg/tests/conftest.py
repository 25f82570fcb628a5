from __future__ import annotations

import pytest

from artcontext import MockGateway, PaintingQuery, build_index

from helpers import art_graph_30

CONCEPT_FIXTURE = (
    "1. Rural landscape\n"
    "2. Agricultural life\n"
    "3. Flemish village scenes\n"
    "4. Seasonal labor\n"
    "5. Everyday devotion"
)

RANKING_FIXTURE = "7, 3, 10, 1, 5, 2, 9, 4, 8, 6"

EXPLANATION_FIXTURE = (
    "The painting places seasonal field work at the center of village life, "
    "linking the harvest to the rhythms of the rural calendar and to the "
    "local workshop traditions recorded in the context entries."
)

DEFAULT_FIXTURES = {
    "Task: concept detection": CONCEPT_FIXTURE,
    "Task: candidate ranking": RANKING_FIXTURE,
    "Describe and explain this painting": EXPLANATION_FIXTURE,
}


@pytest.fixture
def art_graph():
    return art_graph_30()


@pytest.fixture
def art_index(art_graph):
    return build_index(MockGateway(), art_graph)


@pytest.fixture
def scripted_gateway():
    return MockGateway(dict(DEFAULT_FIXTURES))


@pytest.fixture
def painting():
    return PaintingQuery(
        attributes={
            "title": "Summer",
            "artist": "Abel Grimmer",
            "technique": "oil on panel",
            "timeframe": "1607",
            "type": "landscape",
            "school": "Flemish",
        }
    )
