import numpy as np
import pytest

from triage import KnowledgeMatrix


@pytest.fixture
def mini_matrix():
    # fever separates the two conditions strongly, cough barely
    return KnowledgeMatrix(
        ("flu", "cold"),
        ("fever", "cough"),
        np.array([[0.9, 0.6], [0.1, 0.4]]),
    )


@pytest.fixture
def clinic_matrix():
    table = np.array(
        [
            [0.90, 0.70, 0.10, 0.20],
            [0.05, 0.60, 0.80, 0.30],
            [0.10, 0.20, 0.30, 0.90],
        ]
    )
    return KnowledgeMatrix(
        ("flu", "strep", "gout"),
        ("fever", "ache", "sore_throat", "toe_pain"),
        table,
    )
