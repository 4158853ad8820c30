# -*- coding: utf-8 -*-
"""
Pipeline modules, one per crisislink subcommand.
"""
