"""
modrec - recupero di campioni da acquisizione modulo (folded sampling).

Sotto-pacchetti:
- sampling: segnali bandlimited, operatore modulo, operatori spettrali, configurazione
- recovery: metodi di recupero (B2R2, differenze di ordine superiore) e registry
- workflows: harness Monte-Carlo, persistenza CSV, logging
"""

__version__ = "0.1.0"
