# CLI module for kocert
