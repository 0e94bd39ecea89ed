"""Cryptojacking analysis toolkit.

Subpackages cover static script fingerprinting (:mod:`cryptojack.jsmetrics`,
:mod:`cryptojack.featurestats`, :mod:`cryptojack.fcm`), the mining WebSocket
protocol (:mod:`cryptojack.mineproto`), the cost/benefit model
(:mod:`cryptojack.econ`) and corpus scanning (:mod:`cryptojack.corpus`).
"""

__version__ = "0.1.0"
