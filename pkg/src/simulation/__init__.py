# Empty init files for proper imports
